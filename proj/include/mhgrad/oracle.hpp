#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "mhgrad/losses.hpp"
#include "mhgrad/models.hpp"

namespace mhgrad {

// Raised when the oracle's independent gradient forms disagree beyond the
// documented tolerance.  The CLI maps it to a dedicated exit code.
struct OracleConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Quadrature abscissas and weights.  gauss_hermite uses the physicists'
// convention (weights sum to sqrt(pi)); nodes are exactly symmetric about 0
// by construction.  n also budgets the effort of the kink-partitioned path
// below, so doubling n refines every oracle value.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    int n;

    static QuadratureRule gauss_hermite(int n);
    static QuadratureRule gauss_legendre(int n); // on (-1,1), weights sum 2
};

// E[g(eps)] for eps ~ N(0,1) where g is smooth except at the given kink
// locations.  The real line is truncated to |eps| <= 13 (mass below 1e-36),
// split at the kinks, and each segment integrated with composite
// Gauss-Legendre panels; effort scales the panel count.  Kinked integrands
// defeat plain Gauss-Hermite (its error stalls near 1e-2 at these
// tolerances), while panels confined to smooth segments converge spectrally.
double gaussian_expectation(const std::function<double(double)>& g,
                            std::vector<double> kinks, int effort);

// E[f(theta + sigma*sqrt(2)*x)] under the rule for smooth f; kink-split
// panels for kinked f.  Deterministic.
double true_objective(const CoupledGaussian1D& model, const LossFn& f,
                      const QuadratureRule& rule);

// The three gradient routes.  fd is the authoritative value.
struct GradientForms {
    double fd;         // central difference of true_objective in theta
    double score_form; // E[f(z) * score(z)]
    double path_form;  // E[f'(z) * dz/dtheta]
};
GradientForms gradient_forms(const CoupledGaussian1D& model, const LossFn& f,
                             const QuadratureRule& rule, double h = 1e-5);

// Authoritative gradient (FD of the objective, default h = 1e-5), checked
// against the score-form quadrature; disagreement beyond 1e-4 relative
// raises OracleConsistencyError.
double true_gradient(const CoupledGaussian1D& model, const LossFn& f,
                     const QuadratureRule& rule, double h = 1e-5);

// |E[(z-mu) g(z)] - sigma2 E[g'(z)]| under the rule, z ~ N(mu, sigma2).
enum class SteinG { Linear, Quadratic, Cubic };
double stein_check(SteinG g_id, double mu, double sigma2, const QuadratureRule& rule);

// Slow Monte Carlo cross-check of true_objective.
double mc_objective(const CoupledGaussian1D& model, const LossFn& f,
                    std::int64_t n, std::uint64_t seed);

} // namespace mhgrad
