#include "mhgrad/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace mhgrad {

LossFn::LossFn(LossId id_, std::vector<double> params_)
    : id(id_), params(std::move(params_)) {
    if (id == LossId::ClippedQuadratic) {
        if (params.empty()) params.push_back(2.0);
        if (params[0] <= 0.0 || !std::isfinite(params[0]))
            throw std::invalid_argument("ClippedQuadratic clip level must be positive");
    }
}

double LossFn::clip() const {
    if (id != LossId::ClippedQuadratic)
        throw std::logic_error("clip() only defined for ClippedQuadratic");
    return params[0];
}

double loss_value(const LossFn& f, double z) {
    if (!std::isfinite(z)) throw std::invalid_argument("loss_value: z must be finite");
    switch (f.id) {
    case LossId::Hinge:
        return z < 1.0 ? 1.0 - z : 0.0;
    case LossId::ClippedQuadratic: {
        const double q = 0.5 * z * z;
        return q < f.clip() ? q : f.clip();
    }
    case LossId::Quadratic:
        return 0.5 * z * z;
    }
    throw std::logic_error("unknown loss id");
}

double loss_grad(const LossFn& f, double z) {
    if (!std::isfinite(z)) throw std::invalid_argument("loss_grad: z must be finite");
    switch (f.id) {
    case LossId::Hinge:
        return z < 1.0 ? -1.0 : 0.0;
    case LossId::ClippedQuadratic: {
        const double b = std::sqrt(2.0 * f.clip());
        return std::abs(z) < b ? z : 0.0;
    }
    case LossId::Quadratic:
        return z;
    }
    throw std::logic_error("unknown loss id");
}

std::vector<double> loss_kinks(const LossFn& f) {
    switch (f.id) {
    case LossId::Hinge:
        return {1.0};
    case LossId::ClippedQuadratic: {
        const double b = std::sqrt(2.0 * f.clip());
        return {-b, b};
    }
    case LossId::Quadratic:
        return {};
    }
    throw std::logic_error("unknown loss id");
}

LossFn loss_from_id(const std::string& id) {
    if (id == "hinge") return LossFn(LossId::Hinge);
    if (id == "clipquad") return LossFn(LossId::ClippedQuadratic);
    if (id == "quad") return LossFn(LossId::Quadratic);
    throw std::invalid_argument("unknown loss id '" + id + "' (expected hinge|clipquad|quad)");
}

std::string loss_id_string(const LossFn& f) {
    switch (f.id) {
    case LossId::Hinge: return "hinge";
    case LossId::ClippedQuadratic: return "clipquad";
    case LossId::Quadratic: return "quad";
    }
    throw std::logic_error("unknown loss id");
}

} // namespace mhgrad
