#include "mhgrad/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "mhgrad/rng.hpp"

namespace mhgrad {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;
constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;
constexpr double kEpsBound = 13.0; // N(0,1) tail mass beyond this < 1e-36

// standard normal density
double phi(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

} // namespace

namespace {

// Orthonormal Hermite recurrence evaluated at z.  Values grow like
// exp(z^2/2) near the extreme roots, so they are rescaled in blocks of
// 1e100 with the accumulated log carried separately; the Newton step
// p1/pp is scale-free and the weight is recovered through logs
// (extreme-node weights below the double range flush to zero, which is
// exact to within their true subnormal size).
struct HermiteEval {
    double p1;       // ~ H_n(z), rescaled
    double pp;       // derivative factor sqrt(2n) * H_{n-1}(z), same scale
    double lnscale;  // ln of the factor divided out
};

HermiteEval hermite_eval(int n, double z) {
    constexpr double pim4 = 0.7511255444649425;        // pi^(-1/4)
    constexpr double ln_rescale = 230.25850929940457;  // ln(1e100)
    double p1 = pim4;
    double p2 = 0.0;
    double lnscale = 0.0;
    for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
        if (std::abs(p1) > 1e100) {
            p1 *= 1e-100;
            p2 *= 1e-100;
            lnscale += ln_rescale;
        }
    }
    return HermiteEval{p1, std::sqrt(2.0 * n) * p2, lnscale};
}

// Number of eigenvalues of the Hermite Jacobi matrix (zero diagonal,
// off-diagonals sqrt(j/2)) below x, by the guarded Sturm recurrence.
// Those eigenvalues are exactly the Gauss-Hermite nodes, so bisection on
// this count brackets each root unconditionally -- asymptotic initial
// guesses for Newton mis-converge for n in the hundreds.
int hermite_count_below(int n, double x) {
    int count = 0;
    double d = -x;
    if (d < 0.0) ++count;
    for (int j = 1; j < n; ++j) {
        double denom = d;
        if (denom == 0.0) denom = -1e-300;
        d = -x - (0.5 * j) / denom;
        if (d < 0.0) ++count;
    }
    return count;
}

} // namespace

QuadratureRule QuadratureRule::gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
    QuadratureRule rule;
    rule.n = n;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    const int m = (n + 1) / 2;
    const double bound = std::sqrt(2.0 * n + 1.0) + 1.0;
    for (int i = 0; i < m; ++i) {
        // bracket the (n-1-i)-th smallest eigenvalue (i-th largest root)
        const int target = n - 1 - i;
        double lo = -1e-12; // middle root of odd n sits at exactly 0
        double hi = bound;
        for (int it = 0; it < 90 && hi - lo > 1e-14 * bound; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (hermite_count_below(n, mid) <= target)
                lo = mid;
            else
                hi = mid;
        }
        double z = 0.5 * (lo + hi);
        HermiteEval ev = hermite_eval(n, z);
        for (int it = 0; it < 20; ++it) { // Newton polish to machine precision
            const double step = ev.p1 / ev.pp;
            const double z1 = z;
            z = z1 - step;
            if (z <= lo - 1e-9 || z >= hi + 1e-9) { // stay inside the bracket
                z = z1;
                break;
            }
            ev = hermite_eval(n, z);
            if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z1))) break;
        }
        if (n % 2 == 1 && i == m - 1) z = 0.0;
        rule.nodes[i] = z;
        rule.nodes[n - 1 - i] = -z;
        double w = (ev.lnscale == 0.0) ? 2.0 / (ev.pp * ev.pp) : 0.0;
        if (ev.lnscale != 0.0 || !std::isfinite(w))
            w = std::exp(std::log(2.0) - 2.0 * (std::log(std::abs(ev.pp)) + ev.lnscale));
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    // built descending (positive roots first); flip to ascending
    std::reverse(rule.nodes.begin(), rule.nodes.end());
    std::reverse(rule.weights.begin(), rule.weights.end());
    return rule;
}

QuadratureRule QuadratureRule::gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    QuadratureRule rule;
    rule.n = n;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15) break;
        }
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    if (n % 2 == 1) rule.nodes[m - 1] = 0.0;
    return rule;
}

double gaussian_expectation(const std::function<double(double)>& g,
                            std::vector<double> kinks, int effort) {
    if (effort < 32) throw std::invalid_argument("gaussian_expectation: effort must be >= 32");
    static const QuadratureRule gl = QuadratureRule::gauss_legendre(16);

    std::vector<double> cuts;
    cuts.push_back(-kEpsBound);
    std::sort(kinks.begin(), kinks.end());
    for (double k : kinks)
        if (k > -kEpsBound && k < kEpsBound &&
            (cuts.empty() || k > cuts.back() + 1e-14))
            cuts.push_back(k);
    cuts.push_back(kEpsBound);

    // Panel width shrinks as effort grows: total evaluations ~ effort.
    const double width = std::min(2.0, 2.0 * kEpsBound * 16.0 / static_cast<double>(effort));

    double total = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double a = cuts[s];
        const double b = cuts[s + 1];
        const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / width)));
        const double pw = (b - a) / panels;
        for (int p = 0; p < panels; ++p) {
            const double lo = a + p * pw;
            const double half = 0.5 * pw;
            const double mid = lo + half;
            double acc = 0.0;
            for (int q = 0; q < gl.n; ++q) {
                const double e = mid + half * gl.nodes[q];
                acc += gl.weights[q] * g(e) * phi(e);
            }
            total += acc * half;
        }
    }
    return total;
}

namespace {

// kinks of f mapped to eps-space for the given model
std::vector<double> eps_kinks(const CoupledGaussian1D& model, const LossFn& f) {
    std::vector<double> out;
    const double s = model.sigma();
    for (double k : loss_kinks(f)) out.push_back((k - model.theta) / s);
    return out;
}

} // namespace

double true_objective(const CoupledGaussian1D& model, const LossFn& f,
                      const QuadratureRule& rule) {
    if (rule.n < 32) throw std::invalid_argument("true_objective: rule.n must be >= 32");
    const double s = model.sigma();
    if (loss_kinks(f).empty()) {
        const double sqrt2s = std::sqrt(2.0) * s;
        double acc = 0.0;
        for (int i = 0; i < rule.n; ++i)
            acc += rule.weights[i] * loss_value(f, model.theta + sqrt2s * rule.nodes[i]);
        return acc / std::sqrt(kPi);
    }
    return gaussian_expectation(
        [&](double e) { return loss_value(f, model.theta + s * e); },
        eps_kinks(model, f), rule.n);
}

GradientForms gradient_forms(const CoupledGaussian1D& model, const LossFn& f,
                             const QuadratureRule& rule, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("gradient_forms: h must be > 0");
    const CoupledGaussian1D up(model.theta + h, model.alpha);
    const CoupledGaussian1D dn(model.theta - h, model.alpha);
    GradientForms out;
    out.fd = (true_objective(up, f, rule) - true_objective(dn, f, rule)) / (2.0 * h);

    const double s = model.sigma();
    const bool smooth = loss_kinks(f).empty();
    const auto score_integrand = [&](double e) {
        const double z = model.theta + s * e;
        return loss_value(f, z) * score_1d(model, z);
    };
    const auto path_integrand = [&](double e) {
        const double z = model.theta + s * e;
        return loss_grad(f, z) * (1.0 + model.alpha * s * e);
    };
    if (smooth) {
        const double sqrt2 = std::sqrt(2.0);
        double acc_s = 0.0;
        double acc_p = 0.0;
        for (int i = 0; i < rule.n; ++i) {
            const double e = sqrt2 * rule.nodes[i];
            acc_s += rule.weights[i] * score_integrand(e);
            acc_p += rule.weights[i] * path_integrand(e);
        }
        out.score_form = acc_s / std::sqrt(kPi);
        out.path_form = acc_p / std::sqrt(kPi);
    } else {
        const std::vector<double> kinks = eps_kinks(model, f);
        out.score_form = gaussian_expectation(score_integrand, kinks, rule.n);
        out.path_form = gaussian_expectation(path_integrand, kinks, rule.n);
    }
    return out;
}

double true_gradient(const CoupledGaussian1D& model, const LossFn& f,
                     const QuadratureRule& rule, double h) {
    const GradientForms g = gradient_forms(model, f, rule, h);
    const double scale = std::max({std::abs(g.fd), std::abs(g.score_form), 1e-12});
    if (std::abs(g.fd - g.score_form) > 1e-4 * scale)
        throw OracleConsistencyError(
            "true_gradient: FD and score-form quadrature disagree beyond 1e-4 relative");
    return g.fd;
}

double stein_check(SteinG g_id, double mu, double sigma2, const QuadratureRule& rule) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("stein_check: sigma2 must be > 0");
    const auto g = [&](double z) {
        switch (g_id) {
        case SteinG::Linear: return z;
        case SteinG::Quadratic: return z * z;
        case SteinG::Cubic: return z * z * z;
        }
        return 0.0;
    };
    const auto dg = [&](double z) {
        switch (g_id) {
        case SteinG::Linear: return 1.0;
        case SteinG::Quadratic: return 2.0 * z;
        case SteinG::Cubic: return 3.0 * z * z;
        }
        return 0.0;
    };
    const double s = std::sqrt(sigma2);
    const double sqrt2s = std::sqrt(2.0) * s;
    double lhs = 0.0;
    double rhs = 0.0;
    for (int i = 0; i < rule.n; ++i) {
        const double z = mu + sqrt2s * rule.nodes[i];
        lhs += rule.weights[i] * (z - mu) * g(z);
        rhs += rule.weights[i] * dg(z);
    }
    const double norm = std::sqrt(kPi);
    return std::abs(lhs / norm - sigma2 * rhs / norm);
}

double mc_objective(const CoupledGaussian1D& model, const LossFn& f,
                    std::int64_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("mc_objective: n must be >= 1");
    NormalRng rng(seed);
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i)
        acc += loss_value(f, sample_1d(model, rng.next()).z);
    return acc / static_cast<double>(n);
}

} // namespace mhgrad
