#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "mhgrad/losses.hpp"
#include "mhgrad/mixing.hpp"
#include "mhgrad/models.hpp"

namespace mhgrad {

// Pathwise and score-function gradient samples computed from one shared
// draw z (common random numbers), so their covariance is estimable.
struct GradPair {
    double g_path;
    double g_mall;
    double z;
};

enum class EstimatorMode { Pathwise, Malliavin, Hybrid };

// Batch summary.  variance is the unbiased per-sample variance of the
// mode's stream (for Hybrid: lambda*g_path + (1-lambda)*g_mall with the
// estimated lambda treated as fixed); absent when n < 2.
struct BatchEstimate {
    double mean;
    std::optional<double> variance;
    std::int64_t n;
    std::optional<MixingStats> mixing; // Hybrid only
};

// f'(z) * dz/dtheta
double pathwise_sample(const CoupledGaussian1D& model, const LossFn& f, double eps);

// f(z) * weight, weight = score_1d or normalized_weight_1d per flag
double malliavin_sample(const CoupledGaussian1D& model, const LossFn& f, double eps,
                        bool normalized);

GradPair sample_grad_pair(const CoupledGaussian1D& model, const LossFn& f, double eps,
                          bool normalized);

// Batch estimate under the requested mode.  Hybrid needs >= 2 pairs (the
// weight is estimated from the batch moments); other modes accept >= 1.
// ridge <= 0 selects the scale-relative default.
BatchEstimate estimate_batch(std::span<const GradPair> pairs, EstimatorMode mode,
                             double ridge);

// Split variant: lambda is estimated on the first half of the batch and
// applied to the second half, removing the same-batch O(1/B) coupling bias.
// Requires >= 4 pairs.  Modes other than Hybrid are unaffected by the split
// and are delegated to estimate_batch on the second half.
BatchEstimate estimate_batch_split(std::span<const GradPair> pairs, EstimatorMode mode,
                                   double ridge);

} // namespace mhgrad
