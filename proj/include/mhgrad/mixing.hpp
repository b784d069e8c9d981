#pragma once

#include <cstdint>
#include <span>

namespace mhgrad {

struct GradPair; // estimators.hpp

// Empirical second moments of a paired estimator batch together with the
// mixing weight computed from them.
struct MixingStats {
    double v_path;
    double v_mall;
    double c;
    double lambda_hat;
    double ridge;
    std::int64_t n;
};

// Finite-sample deviation bound for the estimated mixing weight:
//   bound = (3 M^2 / ridge) * sqrt(3/2) * sqrt(log(6/delta) / (2 B))
struct LambdaBound {
    double M;
    double delta;
    std::int64_t B;
    double bound;
};

// Unbiased sample variances and covariance of (g_path, g_mall), B-1
// denominators.  Returns (v_path, v_mall, c).
struct Moments {
    double v_path;
    double v_mall;
    double c;
};
Moments empirical_moments(std::span<const GradPair> pairs);

// Scale-relative default ridge.
double default_ridge(double v_path, double v_mall);

// (v_mall - c) / (v_path + v_mall - 2c + ridge), clipped to [0,1].
// A fully degenerate batch (all moments zero) returns 1: prefer pathwise.
double lambda_star(double v_path, double v_mall, double c, double ridge);

// lambda^2 v_path + (1-lambda)^2 v_mall + 2 lambda (1-lambda) c
double hybrid_variance(double v_path, double v_mall, double c, double lambda);

LambdaBound lambda_bound(double M, double ridge, std::int64_t B, double delta);

// Moments + clipped weight in one step, using default_ridge when ridge <= 0.
MixingStats mixing_stats(std::span<const GradPair> pairs, double ridge);

} // namespace mhgrad
