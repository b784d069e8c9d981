#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace mhgrad {

// One-dimensional Gaussian family z ~ N(theta, sigma(theta)^2) with the
// mean-scale coupling sigma(theta) = exp(alpha*theta).  alpha >= 0 controls
// how strongly the scale reacts to the location parameter; alpha = 0 gives
// a pure location family (d sigma / d theta = 0).
struct CoupledGaussian1D {
    double theta;
    double alpha;

    CoupledGaussian1D(double theta_, double alpha_);

    double sigma() const;
};

// One reparameterized draw: z = theta + sigma(theta) * eps with the driving
// standard-normal eps kept alongside.
struct Sample1D {
    double eps;
    double z;
};

// z = theta + exp(alpha*theta) * eps
Sample1D sample_1d(const CoupledGaussian1D& model, double eps);

// dz/dtheta = 1 + alpha * sigma(theta) * eps
double path_jacobian_1d(const CoupledGaussian1D& model, double eps);

// Raw Malliavin weight = d/dtheta log p_theta(z)
//   = (z-theta)/sigma^2 + alpha*((z-theta)^2/sigma^2 - 1)
double score_1d(const CoupledGaussian1D& model, double z);

// score_1d / sqrt(1 + alpha^2).  Tames the weight for large alpha at the
// cost of scaling the estimator's expectation by the same factor.
double normalized_weight_1d(const CoupledGaussian1D& model, double z);

// -log sqrt(2 pi) - log sigma - (z-theta)^2 / (2 sigma^2)
double log_density_1d(const CoupledGaussian1D& model, double z);

// Diagonal Gaussian in d dimensions, parameterized by mean and log-variance.
struct DiagGaussian {
    std::vector<double> mu;
    std::vector<double> log_var;

    DiagGaussian(std::vector<double> mu_, std::vector<double> log_var_);

    std::size_t dim() const { return mu.size(); }
};

double log_density_diag(const DiagGaussian& model, const std::vector<double>& z);

// Gradient of the diagonal-Gaussian log-density with respect to (mu, log_var):
//   d/dmu_k      = (z_k - mu_k) / sigma_k^2
//   d/dlogvar_k  = ((z_k - mu_k)^2 / sigma_k^2 - 1) / 2
std::pair<std::vector<double>, std::vector<double>>
malliavin_weight_diag(const DiagGaussian& model, const std::vector<double>& z);

} // namespace mhgrad
