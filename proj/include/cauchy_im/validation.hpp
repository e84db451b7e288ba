#pragma once

#include "cauchy_im/cauchy.hpp"
#include "cauchy_im/im.hpp"
#include "cauchy_im/intervals.hpp"
#include "cauchy_im/quadrature.hpp"
#include "cauchy_im/uniformity.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cauchy_im {

/// Inference procedures the harness can replicate.
///   basic           one observation, sigma known (n must be 1)
///   conditional     location, sigma known
///   joint           (mu, sigma) jointly, density-contour set
///   marginal_mu     mu with sigma unknown
///   marginal_sigma  sigma with mu unknown
///   bayes_flat      flat-prior posterior for mu, sigma known
///   bayes_pitman_mu / bayes_pitman_sigma   Pitman-prior posterior marginals
enum class Method { basic, conditional, joint, marginal_mu, marginal_sigma, bayes_flat, bayes_pitman_mu, bayes_pitman_sigma };

std::string to_string(Method method);
Method parse_method(const std::string& name);

struct Scenario {
    std::size_t n = 5;
    double mu = 0.0;
    double sigma = 1.0;
    Method method = Method::conditional;
    RandomSetKind kind = RandomSetKind::density_contour;
    double level = 0.95;
    std::size_t n_sim = 10000;
    std::uint64_t seed = 0;
    /// Values below 1 shrink every plausibility, pl -> max(0, 1 - (1 - pl) / shrink): an invalid
    /// negative control.
    double shrink = 1.0;
};

struct SimulationReport {
    std::string test;  ///< "uniformity" or "coverage"
    Scenario scenario;
    double coverage = 0.0;
    double coverage_se = 0.0;
    UniformityStats uniformity;
    bool dominance_pass = false;
    double runtime_seconds = 0.0;
    std::string timestamp;
    std::string version;

    /// JSON with keys in a fixed order: test, scenario, metrics, provenance.
    std::string to_json(int indent = 2) const;
    static SimulationReport from_json(const std::string& text);
    /// The JSON with runtime and timestamp removed; equal for equal (scenario, seed).
    std::string deterministic_json() const;
};

/// pl(truth) for one data set under the scenario's method. For Bayes methods this is
/// 2 min(F, 1 - F) of the posterior cdf at the truth.
double plausibility_at_truth(const Scenario& scenario, std::span<const double> data);

/// Level interval for the scenario's parameter; joint scenarios have none (DomainError).
Interval scenario_interval(const Scenario& scenario, std::span<const double> data);

/// Replicates pl(truth) and tests it against U(0, 1). Coverage is the rate of pl > 1 - level.
/// Needs n_sim >= 1000.
SimulationReport uniformity_at_truth(const Scenario& scenario, unsigned threads = 0);

/// Replicates the level interval (the plausibility region for joint) and counts how often it
/// holds the truth. Uniformity statistics of pl(truth) are reported as well.
SimulationReport interval_coverage(const Scenario& scenario, unsigned threads = 0);

/// log of (1 / sigma*) |d(mu*, sigma*) / d(mu, sigma)|: the prior on (mu, sigma) implied by
/// placing the Pitman prior on theta* = (a theta + b) / (c theta + d).
double implied_log_prior(double mu, double sigma, const MobiusCoeffs& transform);

/// Posterior marginal of mu obtained by transforming the data, using the Pitman prior on the
/// transformed parameter, and mapping back.
GridDensity transformed_posterior_mu(std::span<const double> data, const MobiusCoeffs& transform);

struct ConflictReport {
    double level;
    Interval direct_mu;           ///< Pitman prior on (mu, sigma), from the data
    Interval transformed_mu;      ///< Pitman prior on (mu*, sigma*), from the transformed data, back on mu
    Interval transformed_mu_star; ///< interval for mu* from the transformed data
    double lower_discrepancy;
    double upper_discrepancy;
};

/// Equal-tailed level intervals for mu from the two constructions. DomainError when a datum
/// hits the pole of the transform.
ConflictReport fiducial_conflict_demo(std::span<const double> data, double level = 0.95,
                                      const MobiusCoeffs& transform = MobiusCoeffs::reciprocal());

}  // namespace cauchy_im
