#pragma once

#include <string>
#include <vector>

namespace mhgrad {

enum class LossId { Hinge, ClippedQuadratic, Quadratic };

// Scalar test objective with value, a.e.-gradient, and its kink locations.
// Kink subgradients take the flat-side value (0), so they are consistent
// with the right/left limit on the side where the loss is constant; kinks
// are measure-zero under continuous sampling.
struct LossFn {
    LossId id;
    std::vector<double> params; // ClippedQuadratic: {clip level}, default 2

    explicit LossFn(LossId id_, std::vector<double> params_ = {});

    double clip() const; // ClippedQuadratic only
};

double loss_value(const LossFn& f, double z);
double loss_grad(const LossFn& f, double z);

// z-locations where loss_grad is discontinuous (empty for Quadratic).
std::vector<double> loss_kinks(const LossFn& f);

// CLI ids: "hinge", "clipquad", "quad"
LossFn loss_from_id(const std::string& id);
std::string loss_id_string(const LossFn& f);

} // namespace mhgrad
