#pragma once

#include <span>

#include "mhgrad/estimators.hpp"
#include "mhgrad/oracle.hpp"

namespace mhgrad {

// European call Delta benchmark under geometric Brownian motion with
// physical drift and no discounting: V = E[max(S_T - K, 0)],
// S_T = s0 * exp((mu - sigma^2/2) T + sigma W_T).
struct GbmSpec {
    double s0;
    double mu;
    double sigma;
    double T;
    double K;

    GbmSpec(double s0_, double mu_, double sigma_, double T_, double K_);
};

// S_T for a terminal Brownian value w = W_T.
double terminal_price(const GbmSpec& spec, double w);

// 1{S_T > K} * S_T / s0
double delta_pathwise_sample(const GbmSpec& spec, double w);

// max(S_T - K, 0) * w / (sigma * T * s0)
double delta_malliavin_sample(const GbmSpec& spec, double w);

// Both Delta samples from one shared w (common random numbers); stored as a
// GradPair with z = w so the mixing machinery applies unchanged.
GradPair delta_pair(const GbmSpec& spec, double w);

// Bump-and-revalue sample with common random numbers across the two bumps.
double delta_bump_sample(const GbmSpec& spec, double w, double h);

// Deterministic E[max(S_T - K, 0)] by strike-split quadrature over w.
double call_value_quadrature(const GbmSpec& spec, const QuadratureRule& rule);

// Reference Delta: central difference in s0 of call_value_quadrature.
// h <= 0 selects the default bump 1e-4 * s0; h/s0 must stay in [1e-7, 1e-3].
double delta_oracle(const GbmSpec& spec, const QuadratureRule& rule, double h = 0.0);

// Hybrid Delta over paired samples, Algorithm-1 mixing.
BatchEstimate delta_hybrid(const GbmSpec& spec, std::span<const GradPair> pairs,
                           double ridge);

} // namespace mhgrad
