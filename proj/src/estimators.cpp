#include "mhgrad/estimators.hpp"

#include <stdexcept>

#include "mhgrad/running_moments.hpp"

namespace mhgrad {

double pathwise_sample(const CoupledGaussian1D& model, const LossFn& f, double eps) {
    const Sample1D s = sample_1d(model, eps);
    return loss_grad(f, s.z) * path_jacobian_1d(model, eps);
}

double malliavin_sample(const CoupledGaussian1D& model, const LossFn& f, double eps,
                        bool normalized) {
    const Sample1D s = sample_1d(model, eps);
    const double w = normalized ? normalized_weight_1d(model, s.z) : score_1d(model, s.z);
    return loss_value(f, s.z) * w;
}

GradPair sample_grad_pair(const CoupledGaussian1D& model, const LossFn& f, double eps,
                          bool normalized) {
    const Sample1D s = sample_1d(model, eps);
    const double gp = loss_grad(f, s.z) * path_jacobian_1d(model, eps);
    const double w = normalized ? normalized_weight_1d(model, s.z) : score_1d(model, s.z);
    return GradPair{gp, loss_value(f, s.z) * w, s.z};
}

namespace {

BatchEstimate single_stream_estimate(std::span<const GradPair> pairs, EstimatorMode mode) {
    RunningMoments acc;
    for (const GradPair& p : pairs)
        acc.push(mode == EstimatorMode::Pathwise ? p.g_path : p.g_mall);
    BatchEstimate out{acc.mean, std::nullopt, acc.n, std::nullopt};
    if (acc.n >= 2) out.variance = acc.variance();
    return out;
}

} // namespace

BatchEstimate estimate_batch(std::span<const GradPair> pairs, EstimatorMode mode,
                             double ridge) {
    if (mode == EstimatorMode::Hybrid) {
        if (pairs.size() < 2)
            throw std::invalid_argument("estimate_batch: Hybrid needs >= 2 pairs");
        PairedMoments acc;
        for (const GradPair& p : pairs) acc.push(p.g_path, p.g_mall);
        const double vp = acc.var_p();
        const double vm = acc.var_m();
        const double c = acc.cov();
        const double eps = ridge > 0.0 ? ridge : default_ridge(vp, vm);
        const double lam = lambda_star(vp, vm, c, eps);
        BatchEstimate out;
        out.mean = lam * acc.mean_p + (1.0 - lam) * acc.mean_m;
        out.variance = hybrid_variance(vp, vm, c, lam);
        out.n = acc.n;
        out.mixing = MixingStats{vp, vm, c, lam, eps, acc.n};
        return out;
    }
    if (pairs.empty())
        throw std::invalid_argument("estimate_batch: needs >= 1 pair");
    return single_stream_estimate(pairs, mode);
}

BatchEstimate estimate_batch_split(std::span<const GradPair> pairs, EstimatorMode mode,
                                   double ridge) {
    if (mode != EstimatorMode::Hybrid)
        return estimate_batch(pairs.subspan(pairs.size() / 2), mode, ridge);
    if (pairs.size() < 4)
        throw std::invalid_argument("estimate_batch_split: Hybrid needs >= 4 pairs");
    const std::size_t half = pairs.size() / 2;
    const MixingStats ms = mixing_stats(pairs.first(half), ridge);
    PairedMoments acc;
    for (const GradPair& p : pairs.subspan(half)) acc.push(p.g_path, p.g_mall);
    const double lam = ms.lambda_hat;
    BatchEstimate out;
    out.mean = lam * acc.mean_p + (1.0 - lam) * acc.mean_m;
    out.variance = hybrid_variance(acc.var_p(), acc.var_m(), acc.cov(), lam);
    out.n = acc.n;
    out.mixing = MixingStats{ms.v_path, ms.v_mall, ms.c, lam, ms.ridge, ms.n};
    return out;
}

} // namespace mhgrad
