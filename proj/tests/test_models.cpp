#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mhgrad/models.hpp"
#include "mhgrad/oracle.hpp"
#include "mhgrad/rng.hpp"
#include "mhgrad/running_moments.hpp"

using namespace mhgrad;

namespace {
constexpr double kExp16 = 4.9530324243951148;  // e^{1.6}
constexpr double kLogSqrt2Pi = 0.91893853320467274;
} // namespace

TEST_CASE("sample_1d basic values") {
    CHECK(sample_1d(CoupledGaussian1D(0.8, 0.0), 0.0).z == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(sample_1d(CoupledGaussian1D(0.0, 7.3), 1.0).z == doctest::Approx(1.0).epsilon(1e-15));
    const Sample1D s = sample_1d(CoupledGaussian1D(0.8, 2.0), 0.5);
    CHECK(s.z == doctest::Approx(0.8 + 0.5 * kExp16).epsilon(1e-14));
    CHECK(s.eps == 0.5);
}

TEST_CASE("sample_1d rejects non-finite input") {
    const CoupledGaussian1D m(0.8, 2.0);
    CHECK_THROWS_AS(sample_1d(m, std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
    CHECK_THROWS_AS(sample_1d(m, std::numeric_limits<double>::infinity()), std::invalid_argument);
    CHECK_THROWS_AS(CoupledGaussian1D(0.8, -1.0), std::invalid_argument);
}

TEST_CASE("path_jacobian_1d values and finite-difference consistency") {
    CHECK(path_jacobian_1d(CoupledGaussian1D(3.0, 0.0), 1.7) == 1.0);
    CHECK(path_jacobian_1d(CoupledGaussian1D(0.0, 2.0), 0.0) == 1.0);
    CHECK(path_jacobian_1d(CoupledGaussian1D(0.8, 2.0), 1.0) ==
          doctest::Approx(1.0 + 2.0 * kExp16).epsilon(1e-14));

    const double h = 1e-6;
    for (double eps : {-1.3, -0.2, 0.5, 2.0}) {
        const double up = sample_1d(CoupledGaussian1D(0.8 + h, 2.0), eps).z;
        const double dn = sample_1d(CoupledGaussian1D(0.8 - h, 2.0), eps).z;
        const double fd = (up - dn) / (2.0 * h);
        const double jac = path_jacobian_1d(CoupledGaussian1D(0.8, 2.0), eps);
        CHECK(jac == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("score_1d trivial values") {
    CHECK(score_1d(CoupledGaussian1D(0.4, 1.5), 0.4) == doctest::Approx(-1.5).epsilon(1e-15));
    CHECK(score_1d(CoupledGaussian1D(2.0, 0.0), 3.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("score matches finite differences of log-density") {
    // benchmark point plus a surrounding grid
    const std::vector<double> thetas = {-0.5, 0.0, 0.8, 1.0};
    const std::vector<double> alphas = {0.0, 0.7, 2.0, 2.5};
    const std::vector<double> zs = {-2.0, 0.3, 0.8, 2.0, 5.0};
    const double h = 1e-6;
    for (double t : thetas)
        for (double a : alphas)
            for (double z : zs) {
                const double fd = (log_density_1d(CoupledGaussian1D(t + h, a), z) -
                                   log_density_1d(CoupledGaussian1D(t - h, a), z)) /
                                  (2.0 * h);
                const double sc = score_1d(CoupledGaussian1D(t, a), z);
                CHECK(sc == doctest::Approx(fd).epsilon(1e-5));
            }
    // the benchmark point at tighter tolerance
    const double fd = (log_density_1d(CoupledGaussian1D(0.8 + h, 2.0), 2.0) -
                       log_density_1d(CoupledGaussian1D(0.8 - h, 2.0), 2.0)) /
                      (2.0 * h);
    CHECK(score_1d(CoupledGaussian1D(0.8, 2.0), 2.0) == doctest::Approx(fd).epsilon(1e-6));
    CHECK(score_1d(CoupledGaussian1D(0.8, 2.0), 2.0) ==
          doctest::Approx(-1.8336902077682658).epsilon(1e-12));
}

TEST_CASE("normalized weight composition") {
    CHECK(normalized_weight_1d(CoupledGaussian1D(0.3, 0.0), 1.1) ==
          score_1d(CoupledGaussian1D(0.3, 0.0), 1.1));
    CHECK(normalized_weight_1d(CoupledGaussian1D(0.4, 2.0), 0.4) ==
          doctest::Approx(-2.0 / std::sqrt(5.0)).epsilon(1e-15));
    CHECK(normalized_weight_1d(CoupledGaussian1D(0.8, 2.0), 2.0) ==
          doctest::Approx(score_1d(CoupledGaussian1D(0.8, 2.0), 2.0) / std::sqrt(5.0))
              .epsilon(1e-15));
}

TEST_CASE("log_density_1d values") {
    CHECK(log_density_1d(CoupledGaussian1D(0.0, 0.0), 0.0) ==
          doctest::Approx(-kLogSqrt2Pi).epsilon(1e-15));
    CHECK(log_density_1d(CoupledGaussian1D(0.8, 2.0), 0.8) ==
          doctest::Approx(-kLogSqrt2Pi - 1.6).epsilon(1e-15));
}

TEST_CASE("density integrates to 1 over Gauss-Hermite nodes") {
    const QuadratureRule rule = QuadratureRule::gauss_hermite(128);
    for (double a : {0.0, 1.0, 2.0}) {
        const CoupledGaussian1D m(0.8, a);
        const double s = m.sigma();
        double total = 0.0;
        for (int i = 0; i < rule.n; ++i) {
            const double x = rule.nodes[i];
            const double z = m.theta + std::sqrt(2.0) * s * x;
            total += rule.weights[i] *
                     std::exp(log_density_1d(m, z) + x * x + std::log(std::sqrt(2.0) * s));
        }
        CHECK(std::abs(total - 1.0) < 1e-10);
    }
}

TEST_CASE("reparameterization consistency at N=1e5") {
    const std::int64_t N = 100000;
    int check = 0;
    for (auto [t, a] : std::vector<std::pair<double, double>>{{0.8, 2.0}, {0.2, 2.5}, {1.0, 0.5}}) {
        const CoupledGaussian1D m(t, a);
        NormalRng rng(991 + 7 * check++);
        RunningMoments acc;
        for (std::int64_t i = 0; i < N; ++i) acc.push(sample_1d(m, rng.next()).z);
        const double s = m.sigma();
        CHECK(std::abs(acc.mean - t) <= 4.0 * s / std::sqrt(static_cast<double>(N)));
        CHECK(std::sqrt(acc.variance()) == doctest::Approx(s).epsilon(0.05));
    }
}

TEST_CASE("score has zero mean under the model (quadrature)") {
    const QuadratureRule rule = QuadratureRule::gauss_hermite(64);
    const double inv_sqrt_pi = 1.0 / std::sqrt(3.14159265358979323846);
    for (auto [t, a] : std::vector<std::pair<double, double>>{{0.8, 2.0}, {0.0, 0.0}, {-0.3, 1.2}}) {
        const CoupledGaussian1D m(t, a);
        const double s = m.sigma();
        double acc = 0.0;
        for (int i = 0; i < rule.n; ++i)
            acc += rule.weights[i] * score_1d(m, t + std::sqrt(2.0) * s * rule.nodes[i]);
        CHECK(std::abs(acc * inv_sqrt_pi) < 1e-10);
    }
}

TEST_CASE("Stein identity for linear and quadratic test functions") {
    const QuadratureRule rule = QuadratureRule::gauss_hermite(64);
    CHECK(stein_check(SteinG::Linear, 0.8, std::exp(3.2), rule) < 1e-10);
    CHECK(stein_check(SteinG::Quadratic, 0.8, std::exp(3.2), rule) < 1e-10);
    CHECK(stein_check(SteinG::Linear, -1.0, 0.25, rule) < 1e-12);
    CHECK(stein_check(SteinG::Quadratic, 0.0, 1.0, rule) < 1e-12);
}

TEST_CASE("malliavin_weight_diag trivial cases") {
    const DiagGaussian m({0.5, -1.0, 2.0}, {0.0, 0.4, -0.3});
    const auto [d_mu, d_lv] = malliavin_weight_diag(m, {0.5, -1.0, 2.0});
    for (double v : d_mu) CHECK(v == 0.0);
    for (double v : d_lv) CHECK(v == doctest::Approx(-0.5).epsilon(1e-15));

    const DiagGaussian u({0.0}, {0.0});
    const auto [gm, gl] = malliavin_weight_diag(u, {1.0});
    CHECK(gm[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gl[0] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("malliavin_weight_diag rejects dimension mismatch") {
    const DiagGaussian m({0.0, 1.0}, {0.0, 0.0});
    CHECK_THROWS_AS(malliavin_weight_diag(m, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(DiagGaussian({1.0}, {0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(DiagGaussian({}, {}), std::invalid_argument);
}

TEST_CASE("malliavin_weight_diag matches finite differences, d=3") {
    const DiagGaussian m({0.4, -0.7, 1.3}, {0.2, -0.5, 0.9});
    const std::vector<double> z = {1.1, -0.2, 0.6};
    const auto [d_mu, d_lv] = malliavin_weight_diag(m, z);
    const double h = 1e-6;
    for (std::size_t k = 0; k < 3; ++k) {
        auto mu_up = m.mu;
        auto mu_dn = m.mu;
        mu_up[k] += h;
        mu_dn[k] -= h;
        const double fd_mu = (log_density_diag(DiagGaussian(mu_up, m.log_var), z) -
                              log_density_diag(DiagGaussian(mu_dn, m.log_var), z)) /
                             (2.0 * h);
        CHECK(d_mu[k] == doctest::Approx(fd_mu).epsilon(1e-6));

        auto lv_up = m.log_var;
        auto lv_dn = m.log_var;
        lv_up[k] += h;
        lv_dn[k] -= h;
        const double fd_lv = (log_density_diag(DiagGaussian(m.mu, lv_up), z) -
                              log_density_diag(DiagGaussian(m.mu, lv_dn), z)) /
                             (2.0 * h);
        CHECK(d_lv[k] == doctest::Approx(fd_lv).epsilon(1e-6));
    }
}

TEST_CASE("malliavin_weight_diag has zero mean per coordinate (quadrature)") {
    const DiagGaussian m({0.4, -0.7, 1.3}, {0.2, -0.5, 0.9});
    const QuadratureRule rule = QuadratureRule::gauss_hermite(64);
    const double inv_sqrt_pi = 1.0 / std::sqrt(3.14159265358979323846);
    for (std::size_t k = 0; k < 3; ++k) {
        const double sk = std::exp(0.5 * m.log_var[k]);
        double acc_mu = 0.0;
        double acc_lv = 0.0;
        std::vector<double> z = m.mu; // off-coordinate values do not matter
        for (int i = 0; i < rule.n; ++i) {
            z[k] = m.mu[k] + std::sqrt(2.0) * sk * rule.nodes[i];
            const auto [d_mu, d_lv] = malliavin_weight_diag(m, z);
            acc_mu += rule.weights[i] * d_mu[k];
            acc_lv += rule.weights[i] * d_lv[k];
        }
        CHECK(std::abs(acc_mu * inv_sqrt_pi) < 1e-10);
        CHECK(std::abs(acc_lv * inv_sqrt_pi) < 1e-10);
    }
}

TEST_CASE("diag score-function gradient matches closed form on a quadratic loss") {
    // f(z) = sum z_k^2: E[f] = sum(mu_k^2 + sigma_k^2), so d/dmu_k = 2 mu_k
    // and d/dlogvar_k = sigma_k^2.
    const DiagGaussian m({0.4, -0.7, 1.3}, {0.2, -0.5, 0.9});
    const std::int64_t N = 1000000;
    NormalRng rng(2024);
    std::vector<RunningMoments> acc_mu(3), acc_lv(3);
    std::vector<double> z(3);
    for (std::int64_t i = 0; i < N; ++i) {
        double f = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            const double sk = std::exp(0.5 * m.log_var[k]);
            z[k] = m.mu[k] + sk * rng.next();
            f += z[k] * z[k];
        }
        const auto [d_mu, d_lv] = malliavin_weight_diag(m, z);
        for (std::size_t k = 0; k < 3; ++k) {
            acc_mu[k].push(f * d_mu[k]);
            acc_lv[k].push(f * d_lv[k]);
        }
    }
    for (std::size_t k = 0; k < 3; ++k) {
        const double se_mu = std::sqrt(acc_mu[k].variance() / static_cast<double>(N));
        const double se_lv = std::sqrt(acc_lv[k].variance() / static_cast<double>(N));
        CHECK(std::abs(acc_mu[k].mean - 2.0 * m.mu[k]) <= 3.0 * se_mu);
        CHECK(std::abs(acc_lv[k].mean - std::exp(m.log_var[k])) <= 3.0 * se_lv);
    }
}
