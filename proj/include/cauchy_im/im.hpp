#pragma once

#include "cauchy_im/distribution.hpp"
#include "cauchy_im/intervals.hpp"
#include "cauchy_im/uniformity.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace cauchy_im {

/// Nested predictive random set families for a scalar auxiliary U with law P.
///
/// Each family is described by its contour pi(u) = P(u in S). A realization driven by U is
/// S = {u : pi(u) >= pi(U)}:
///   cdf_centered      {u : |F(u) - 1/2| <= |F(U) - 1/2|}
///   one_sided_lower   [U, inf)
///   one_sided_upper   (-inf, U]
///   density_contour   {u : f(u) >= f(U)}
enum class RandomSetKind { cdf_centered, one_sided_lower, one_sided_upper, density_contour };

std::string to_string(RandomSetKind kind);
/// Accepts the names printed by to_string and the hyphenated forms ("density-contour").
RandomSetKind parse_random_set_kind(const std::string& name);

class RandomSetSpec {
public:
    /// `shrink` in (0, 1] scales the family down: S = {u : 1 - pi(u) <= shrink (1 - pi(U))}.
    /// Only shrink = 1 is valid; smaller values exist as a negative control.
    RandomSetSpec(RandomSetKind kind, std::shared_ptr<const UnivariateDistribution> reference, double shrink = 1.0);

    RandomSetKind kind() const noexcept { return kind_; }
    const UnivariateDistribution& reference() const noexcept { return *reference_; }
    std::shared_ptr<const UnivariateDistribution> reference_ptr() const noexcept { return reference_; }
    double shrink() const noexcept { return shrink_; }

    /// pi(u) for the unshrunk family.
    double contour(double u) const;
    /// sup of pi over a set (0 for an empty set).
    double sup_contour(const IntervalSet& set) const;
    /// The realization of S driven by the auxiliary draw u_draw.
    IntervalSet realize(double u_draw) const;
    /// P(S hits `set`).
    double hit_probability(const IntervalSet& set) const;
    /// P(u_star in S).
    double containment_probability(double u_star) const;
    /// {u : pi(u) >= threshold}, closed.
    IntervalSet level_region(double threshold) const;

private:

    RandomSetKind kind_;
    std::shared_ptr<const UnivariateDistribution> reference_;
    double shrink_;
};

/// What a scalar parameter means, so that maps and assertions can be checked against each other.
enum class ParameterKind { location, scale };

/// Monotone association theta = h(u) between the auxiliary and a scalar parameter.
class MonotoneMap {
public:
    MonotoneMap(ParameterKind target, std::function<double(double)> forward, std::function<double(double)> inverse,
                bool increasing, Interval u_domain, Interval theta_domain);

    /// mu = x - sigma * u (single observation and the conditional IM).
    static MonotoneMap location(double x, double sigma);
    /// sigma = d / s on s > 0 (marginal IM for the scale).
    static MonotoneMap reciprocal_scale(double d);
    /// mu = x1 - d * m (marginal IM for the location).
    static MonotoneMap location_ratio(double x1, double d);

    ParameterKind target() const noexcept { return target_; }
    double theta(double u) const { return forward_(u); }
    double u(double theta) const { return inverse_(theta); }
    /// {u : h(u) in set}.
    IntervalSet preimage(const IntervalSet& theta_set) const;
    /// {h(u) : u in set}.
    IntervalSet image(const IntervalSet& u_set) const;
    const Interval& theta_domain() const noexcept { return theta_domain_; }

private:
    double end_u(double theta) const;

    ParameterKind target_;
    std::function<double(double)> forward_;
    std::function<double(double)> inverse_;
    bool increasing_;
    Interval u_domain_;
    Interval theta_domain_;
};

/// A set of values of one scalar parameter: a finite union of closed intervals, or the
/// complement of one (so that complementing twice gives back the original assertion).
class Assertion {
public:
    Assertion(ParameterKind parameter, IntervalSet set, bool negated = false);

    static Assertion singleton(double value, ParameterKind p = ParameterKind::location);
    static Assertion at_most(double value, ParameterKind p = ParameterKind::location);
    static Assertion at_least(double value, ParameterKind p = ParameterKind::location);
    static Assertion interval(double lower, double upper, ParameterKind p = ParameterKind::location);
    /// The whole parameter space.
    static Assertion everything(ParameterKind p = ParameterKind::location);

    ParameterKind parameter() const noexcept { return parameter_; }
    /// The stored intervals; the assertion is their complement when negated() is true.
    const IntervalSet& set() const noexcept { return set_; }
    bool negated() const noexcept { return negated_; }
    /// Closed set whose sup-contour equals that of the assertion (its closure).
    IntervalSet closure() const;
    bool contains(double theta) const;
    Interval space() const;
    Assertion complement() const;

private:
    ParameterKind parameter_;
    IntervalSet set_;
    bool negated_;
};

struct BeliefPlausibility {
    double belief;
    double plausibility;
};

/// Exact belief and plausibility by auxiliary-space probability of the set-containment events.
BeliefPlausibility belief_and_plausibility(const MonotoneMap& map, const Assertion& assertion,
                                           const RandomSetSpec& random_set);

/// Same quantities by simulating realizations of the random set; a cross-check path.
BeliefPlausibility belief_and_plausibility_mc(const MonotoneMap& map, const Assertion& assertion,
                                              const RandomSetSpec& random_set, std::size_t draws,
                                              std::uint64_t seed);

/// Plausibility of the singleton {mu0} from one observation x ~ C(mu, sigma_known):
/// 2 F(-|x - mu0| / sigma), the symmetric random set [-|C|, |C|].
double basic_plausibility(double x, double mu0, double sigma_known);

using PlausibilityFunction = std::function<double(double)>;

struct PlausibilityCurve {
    std::vector<double> grid;
    std::vector<double> values;
};

/// Tabulates a plausibility function on an increasing grid.
PlausibilityCurve tabulate(const PlausibilityFunction& pl, const std::vector<double>& grid);

/// {theta : pl(theta) > 1 - level} as an interval. The tabulated curve brackets the flank
/// crossings, which are then solved on `pl` itself; a flank still above the threshold at
/// the grid end is followed outward, and reported infinite past `search_limit`.
/// Throws DomainError when the curve never exceeds 1 - level.
Interval plausibility_interval(const PlausibilityCurve& curve, const PlausibilityFunction& pl, double level,
                               double search_limit = 1e12);

/// Grid-only variant: flank crossings by linear interpolation between grid points.
Interval plausibility_interval(const PlausibilityCurve& curve, double level);

/// {theta : pl(theta) > 1 - level} as a union of intervals, crossings located on the grid
/// and bisected on `pl`. Use when the plausibility function may be multimodal.
IntervalSet plausibility_region(const PlausibilityCurve& curve, const PlausibilityFunction& pl, double level);

/// Monte Carlo check that the random set is valid for predicting U* ~ aux.
struct ValidityResult {
    std::vector<double> containment;  // P(U* in S | U*), one per draw
    UniformityStats stats;
    bool dominance_pass;
};
ValidityResult validity_check(const RandomSetSpec& random_set, const UnivariateDistribution& aux, std::size_t n_sim,
                              std::uint64_t seed, unsigned threads = 0);

}  // namespace cauchy_im
