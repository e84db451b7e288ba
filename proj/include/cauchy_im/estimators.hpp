#pragma once

#include "cauchy_im/errors.hpp"
#include "cauchy_im/quadrature.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace cauchy_im {

double sample_mean(std::span<const double> data);

/// Mean after dropping floor(trim * n) order statistics from each end; 0 <= trim < 0.5.
double trimmed_mean(std::span<const double> data, double trim_fraction);

/// Flat-prior posterior mean of mu with sigma known. Needs n > 1.
double pitman_estimator(std::span<const double> data, double sigma_known);

/// Cauchy log-likelihood and its gradient with respect to (mu, sigma).
double log_likelihood(std::span<const double> data, double mu, double sigma);
std::array<double, 2> log_likelihood_gradient(std::span<const double> data, double mu, double sigma);

struct MleRun {
    double mu;
    double sigma;
    double log_likelihood;
    int iterations;
    bool converged;
};

struct MleFit {
    double mu;
    double sigma;
    double log_likelihood;
    double gradient_norm;  ///< Euclidean norm of the (mu, sigma) gradient at the optimum
    std::vector<MleRun> runs;  ///< one per start, start 0 being (median, half IQR)
    std::vector<OptimizerStep> trace;  ///< iterates of the winning run
};

/// Joint MLE of (mu, sigma) by coordinate-wise damped Newton in (mu, log sigma), with a
/// golden-section line search wherever the mu-curvature is not negative. Needs n >= 3 and
/// data not all equal (DegenerateDataError otherwise); throws OptimizationError when no
/// start converges.
MleFit mle_joint(std::span<const double> data, int starts = 20, std::uint64_t seed = 0);

/// Profile log-likelihood of mu at fixed sigma with its strict local maxima.
struct LikelihoodLandscape {
    std::vector<double> grid;
    std::vector<double> log_likelihood;
    std::vector<double> maxima;         ///< refined locations, increasing
    std::vector<double> maxima_values;  ///< log-likelihood there
    std::size_t global_index = 0;       ///< index into maxima

    std::size_t non_global_maxima() const { return maxima.empty() ? 0 : maxima.size() - 1; }
};

/// Landscape on a caller-supplied increasing grid.
LikelihoodLandscape profile_landscape_mu(std::span<const double> data, double sigma, const std::vector<double>& grid);

/// Landscape on an automatic grid covering every window [x_i - sigma, x_i + sigma] (no local
/// maximum lies outside them) with spacing min(sigma/16, min gap/4), floored at sigma/256.
LikelihoodLandscape profile_landscape_mu(std::span<const double> data, double sigma);

/// Flat-prior posterior of mu, proportional to prod_i f(x_i; mu, sigma).
GridDensity bayes_posterior_mu_flat(std::span<const double> data, double sigma_known);

/// Marginal posteriors of mu and sigma under the prior (1/sigma) dmu dsigma. Needs n >= 2.
struct PitmanMarginals {
    GridDensity mu;
    GridDensity sigma;
};
PitmanMarginals pitman_posterior_marginals(std::span<const double> data);

/// Log of the unnormalized Pitman-posterior marginal of mu at one point (integral over log sigma).
double pitman_log_marginal_mu(std::span<const double> data, double mu);
/// Log of the unnormalized Pitman-posterior marginal of sigma at one point.
double pitman_log_marginal_sigma(std::span<const double> data, double sigma);

}  // namespace cauchy_im
