#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mhgrad/greeks.hpp"
#include "mhgrad/rng.hpp"
#include "mhgrad/running_moments.hpp"

using namespace mhgrad;

namespace {
const GbmSpec kBench(100.0, 0.05, 0.2, 1.0, 100.0);

// closed-form Delta of the undiscounted call: exp(mu T) Phi(d1)
double closed_form_delta(const GbmSpec& s) {
    const double d1 = (std::log(s.s0 / s.K) + (s.mu + 0.5 * s.sigma * s.sigma) * s.T) /
                      (s.sigma * std::sqrt(s.T));
    return std::exp(s.mu * s.T) * 0.5 * std::erfc(-d1 / std::sqrt(2.0));
}

std::vector<GradPair> draw_pairs(const GbmSpec& spec, std::int64_t n, std::uint64_t seed) {
    NormalRng rng(seed);
    const double sqT = std::sqrt(spec.T);
    std::vector<GradPair> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) out.push_back(delta_pair(spec, sqT * rng.next()));
    return out;
}
} // namespace

TEST_CASE("terminal_price limits") {
    const GbmSpec tiny_vol(100.0, 0.05, 1e-12, 1.0, 100.0);
    CHECK(terminal_price(tiny_vol, 0.3) ==
          doctest::Approx(100.0 * std::exp(0.05)).epsilon(1e-9));

    // mu = sigma^2/2 cancels the drift, so w = 0 returns s0
    const GbmSpec balanced(100.0, 0.02, 0.2, 1.0, 100.0);
    CHECK(terminal_price(balanced, 0.0) == doctest::Approx(100.0).epsilon(1e-15));

    CHECK_THROWS_AS(terminal_price(kBench, std::numeric_limits<double>::quiet_NaN()),
                    std::invalid_argument);
}

TEST_CASE("terminal price has the lognormal mean") {
    NormalRng rng(314);
    RunningMoments acc;
    const std::int64_t N = 1000000;
    for (std::int64_t i = 0; i < N; ++i) acc.push(terminal_price(kBench, rng.next()));
    const double se = std::sqrt(acc.variance() / static_cast<double>(N));
    CHECK(std::abs(acc.mean - 105.12710963760240) <= 3.0 * se);
}

TEST_CASE("single-sample Delta values") {
    // deep out of the money: both estimators return 0
    const GbmSpec otm(100.0, 0.05, 0.2, 1.0, 1e6);
    CHECK(delta_pathwise_sample(otm, 0.5) == 0.0);
    CHECK(delta_malliavin_sample(otm, 0.5) == 0.0);

    // w = 0 kills the Malliavin weight regardless of moneyness
    CHECK(delta_malliavin_sample(kBench, 0.0) == 0.0);

    // a negligible strike makes the pathwise sample S_T / s0 exactly
    const GbmSpec itm(100.0, 0.05, 0.2, 1.0, 1e-9);
    for (double w : {-1.0, 0.0, 2.0})
        CHECK(delta_pathwise_sample(itm, w) ==
              doctest::Approx(terminal_price(itm, w) / 100.0).epsilon(1e-15));

    const GradPair g = delta_pair(kBench, 0.7);
    CHECK(g.g_path == delta_pathwise_sample(kBench, 0.7));
    CHECK(g.g_mall == delta_malliavin_sample(kBench, 0.7));
    CHECK(g.z == 0.7);
}

TEST_CASE("bump-and-revalue equals pathwise away from the strike") {
    // payoff is linear in s0 on either side of the kink, so the CRN central
    // difference is exact wherever both bumps stay on one side
    const double h = 1e-6 * kBench.s0;
    for (double w : {-2.0, -1.0, 1.0, 2.0}) {
        const double bump = delta_bump_sample(kBench, w, h);
        const double path = delta_pathwise_sample(kBench, w);
        CHECK(bump == doctest::Approx(path).epsilon(1e-9));
    }
    CHECK_THROWS_AS(delta_bump_sample(kBench, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(delta_bump_sample(kBench, 0.0, 200.0), std::invalid_argument);
}

TEST_CASE("oracle matches the closed form across moneyness") {
    const QuadratureRule rule = QuadratureRule::gauss_hermite(256);
    const struct {
        double m;
        double delta;
    } refs[] = {
        {0.5, 1.0511997268078097},  {0.8, 0.9762496604353423},
        {1.0, 0.66948165686725038}, {1.2, 0.30191626805054897},
        {2.0, 0.00096447037940053019},
    };
    for (const auto& r : refs) {
        const GbmSpec s(100.0, 0.05, 0.2, 1.0, 100.0 * r.m);
        // central-difference truncation dominates at ~1e-8
        CHECK(delta_oracle(s, rule) == doctest::Approx(r.delta).epsilon(1e-6));
    }

    // vanishing strike: the call is the asset itself, Delta = exp(mu T)
    const GbmSpec tiny_k(100.0, 0.05, 0.2, 1.0, 1e-9);
    CHECK(delta_oracle(tiny_k, rule) == doctest::Approx(std::exp(0.05)).epsilon(1e-8));
}

TEST_CASE("oracle is stable under node doubling and validates the bump") {
    const QuadratureRule r256 = QuadratureRule::gauss_hermite(256);
    const QuadratureRule r512 = QuadratureRule::gauss_hermite(512);
    const double d1 = delta_oracle(kBench, r256);
    const double d2 = delta_oracle(kBench, r512);
    CHECK(std::abs(d1 - d2) < 1e-9);

    CHECK_THROWS_AS(delta_oracle(kBench, r256, 1e-2 * kBench.s0), std::invalid_argument);
    CHECK_THROWS_AS(delta_oracle(kBench, r256, 1e-8 * kBench.s0), std::invalid_argument);
}

TEST_CASE("Monte Carlo Deltas agree with the oracle at the money") {
    const QuadratureRule rule = QuadratureRule::gauss_hermite(256);
    const double ref = delta_oracle(kBench, rule);
    const auto pairs = draw_pairs(kBench, 1000000, 20240915);

    PairedMoments pm;
    for (const auto& g : pairs) pm.push(g.g_path, g.g_mall);
    const double n = static_cast<double>(pairs.size());
    const double se_p = std::sqrt(pm.var_p() / n);
    const double se_m = std::sqrt(pm.var_m() / n);
    CHECK(std::abs(pm.mean_p - ref) <= 3.0 * se_p);
    CHECK(std::abs(pm.mean_m - ref) <= 3.0 * se_m);
}

TEST_CASE("hybrid Delta variance does not exceed the better component") {
    const auto pairs = draw_pairs(kBench, 200000, 777);
    const BatchEstimate h = delta_hybrid(kBench, pairs, 0.0);
    const BatchEstimate p = estimate_batch(pairs, EstimatorMode::Pathwise, 0.0);
    const BatchEstimate m = estimate_batch(pairs, EstimatorMode::Malliavin, 0.0);
    REQUIRE(h.variance.has_value());
    CHECK(*h.variance <= std::min(*p.variance, *m.variance) * (1.0 + 1e-6) + 1e-12);
    REQUIRE(h.mixing.has_value());
    CHECK(h.mixing->lambda_hat >= 0.0);
    CHECK(h.mixing->lambda_hat <= 1.0);

    // degenerate batch: the mixing weight saturates at pathwise
    std::vector<GradPair> flat(8, GradPair{0.9, 0.9, 0.1});
    const BatchEstimate d = delta_hybrid(kBench, flat, 0.0);
    CHECK(d.mean == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(d.mixing->lambda_hat == 1.0);
}

TEST_CASE("pathwise jumps at the strike crossing; Malliavin does not") {
    const double drift = (kBench.mu - 0.5 * kBench.sigma * kBench.sigma) * kBench.T;
    const double w_star = (std::log(kBench.K / kBench.s0) - drift) / kBench.sigma;

    const double step = 1e-10;
    double path_jump = 0.0;
    double mall_jump = 0.0;
    double prev_p = delta_pathwise_sample(kBench, w_star - 50 * step);
    double prev_m = delta_malliavin_sample(kBench, w_star - 50 * step);
    for (int i = -49; i <= 50; ++i) {
        const double w = w_star + i * step;
        const double p = delta_pathwise_sample(kBench, w);
        const double m = delta_malliavin_sample(kBench, w);
        path_jump = std::max(path_jump, std::abs(p - prev_p));
        mall_jump = std::max(mall_jump, std::abs(m - prev_m));
        prev_p = p;
        prev_m = m;
    }
    CHECK(path_jump == doctest::Approx(kBench.K / kBench.s0).epsilon(1e-6));
    CHECK(mall_jump < 1e-8);
}

TEST_CASE("GbmSpec validation") {
    CHECK_THROWS_AS(GbmSpec(0.0, 0.05, 0.2, 1.0, 100.0), std::invalid_argument);
    CHECK_THROWS_AS(GbmSpec(100.0, 0.05, 0.0, 1.0, 100.0), std::invalid_argument);
    CHECK_THROWS_AS(GbmSpec(100.0, 0.05, -0.2, 1.0, 100.0), std::invalid_argument);
    CHECK_THROWS_AS(GbmSpec(100.0, 0.05, 0.2, 0.0, 100.0), std::invalid_argument);
    CHECK_THROWS_AS(GbmSpec(100.0, 0.05, 0.2, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GbmSpec(100.0, std::numeric_limits<double>::infinity(), 0.2, 1.0, 100.0),
                    std::invalid_argument);
}
