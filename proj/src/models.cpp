#include "mhgrad/models.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mhgrad {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + " must be finite");
}
} // namespace

CoupledGaussian1D::CoupledGaussian1D(double theta_, double alpha_)
    : theta(theta_), alpha(alpha_) {
    require_finite(theta, "theta");
    require_finite(alpha, "alpha");
    if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
    if (!std::isfinite(std::exp(alpha * theta)) || std::exp(alpha * theta) <= 0.0)
        throw std::invalid_argument("sigma(theta) = exp(alpha*theta) out of double range");
}

double CoupledGaussian1D::sigma() const { return std::exp(alpha * theta); }

Sample1D sample_1d(const CoupledGaussian1D& model, double eps) {
    require_finite(eps, "eps");
    return Sample1D{eps, model.theta + model.sigma() * eps};
}

double path_jacobian_1d(const CoupledGaussian1D& model, double eps) {
    require_finite(eps, "eps");
    return 1.0 + model.alpha * model.sigma() * eps;
}

double score_1d(const CoupledGaussian1D& model, double z) {
    require_finite(z, "z");
    const double s = model.sigma();
    const double u = (z - model.theta) / s;
    return u / s + model.alpha * (u * u - 1.0);
}

double normalized_weight_1d(const CoupledGaussian1D& model, double z) {
    return score_1d(model, z) / std::sqrt(1.0 + model.alpha * model.alpha);
}

double log_density_1d(const CoupledGaussian1D& model, double z) {
    require_finite(z, "z");
    const double s = model.sigma();
    const double u = (z - model.theta) / s;
    return -kLogSqrt2Pi - std::log(s) - 0.5 * u * u;
}

DiagGaussian::DiagGaussian(std::vector<double> mu_, std::vector<double> log_var_)
    : mu(std::move(mu_)), log_var(std::move(log_var_)) {
    if (mu.empty() || mu.size() != log_var.size())
        throw std::invalid_argument("DiagGaussian: mu and log_var must share dimension d >= 1");
    for (double m : mu) require_finite(m, "mu");
    for (double lv : log_var) {
        require_finite(lv, "log_var");
        if (!std::isfinite(std::exp(lv)) || std::exp(lv) <= 0.0)
            throw std::invalid_argument("DiagGaussian: variance out of double range");
    }
}

double log_density_diag(const DiagGaussian& model, const std::vector<double>& z) {
    if (z.size() != model.dim())
        throw std::invalid_argument("log_density_diag: dimension mismatch");
    double acc = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        const double v = std::exp(model.log_var[k]);
        const double d = z[k] - model.mu[k];
        acc += -kLogSqrt2Pi - 0.5 * model.log_var[k] - 0.5 * d * d / v;
    }
    return acc;
}

std::pair<std::vector<double>, std::vector<double>>
malliavin_weight_diag(const DiagGaussian& model, const std::vector<double>& z) {
    if (z.size() != model.dim())
        throw std::invalid_argument("malliavin_weight_diag: dimension mismatch");
    std::vector<double> d_mu(z.size());
    std::vector<double> d_log_var(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
        const double v = std::exp(model.log_var[k]);
        const double d = z[k] - model.mu[k];
        d_mu[k] = d / v;
        d_log_var[k] = 0.5 * (d * d / v - 1.0);
    }
    return {std::move(d_mu), std::move(d_log_var)};
}

} // namespace mhgrad
