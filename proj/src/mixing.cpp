#include "mhgrad/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mhgrad/estimators.hpp"
#include "mhgrad/running_moments.hpp"

namespace mhgrad {

Moments empirical_moments(std::span<const GradPair> pairs) {
    if (pairs.size() < 2)
        throw std::invalid_argument("empirical_moments: need at least 2 pairs");
    PairedMoments acc;
    for (const GradPair& p : pairs) acc.push(p.g_path, p.g_mall);
    return Moments{acc.var_p(), acc.var_m(), acc.cov()};
}

double default_ridge(double v_path, double v_mall) {
    return 1e-8 * (v_path + v_mall + 1e-30);
}

double lambda_star(double v_path, double v_mall, double c, double ridge) {
    if (v_path < 0.0 || v_mall < 0.0)
        throw std::invalid_argument("lambda_star: variances must be >= 0");
    if (!(ridge > 0.0))
        throw std::invalid_argument("lambda_star: ridge must be > 0");
    if (v_path == 0.0 && v_mall == 0.0 && c == 0.0) return 1.0; // degenerate batch
    const double lam = (v_mall - c) / (v_path + v_mall - 2.0 * c + ridge);
    return std::clamp(lam, 0.0, 1.0);
}

double hybrid_variance(double v_path, double v_mall, double c, double lambda) {
    if (lambda < 0.0 || lambda > 1.0)
        throw std::invalid_argument("hybrid_variance: lambda must be in [0,1]");
    const double om = 1.0 - lambda;
    return lambda * lambda * v_path + om * om * v_mall + 2.0 * lambda * om * c;
}

LambdaBound lambda_bound(double M, double ridge, std::int64_t B, double delta) {
    if (!(M > 0.0)) throw std::invalid_argument("lambda_bound: M must be > 0");
    if (!(ridge > 0.0)) throw std::invalid_argument("lambda_bound: ridge must be > 0");
    if (B < 1) throw std::invalid_argument("lambda_bound: B must be >= 1");
    if (!(delta > 0.0) || delta > 1.0)
        throw std::invalid_argument("lambda_bound: delta must be in (0,1]");
    const double b = (3.0 * M * M / ridge) * std::sqrt(1.5) *
                     std::sqrt(std::log(6.0 / delta) / (2.0 * static_cast<double>(B)));
    return LambdaBound{M, delta, B, b};
}

MixingStats mixing_stats(std::span<const GradPair> pairs, double ridge) {
    const Moments m = empirical_moments(pairs);
    const double eps = ridge > 0.0 ? ridge : default_ridge(m.v_path, m.v_mall);
    const double lam = lambda_star(m.v_path, m.v_mall, m.c, eps);
    return MixingStats{m.v_path, m.v_mall, m.c, lam,
                       eps, static_cast<std::int64_t>(pairs.size())};
}

} // namespace mhgrad
