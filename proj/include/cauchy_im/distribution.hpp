#pragma once

#include "cauchy_im/cauchy.hpp"
#include "cauchy_im/intervals.hpp"
#include "cauchy_im/rng.hpp"

#include <cmath>

namespace cauchy_im {

/// Continuous univariate distribution used as the reference law of an auxiliary variable.
///
/// Beyond pdf/cdf/quantile it answers the level-set questions that density-contour random
/// sets need: where is the density above a level, and how high does it get on a range.
class UnivariateDistribution {
public:
    virtual ~UnivariateDistribution() = default;

    virtual double log_pdf(double x) const = 0;
    virtual double cdf(double x) const = 0;
    virtual double quantile(double p) const = 0;
    virtual double lower() const = 0;
    virtual double upper() const = 0;

    /// sup of log f over range ∩ support; -inf when the intersection is empty.
    virtual double sup_log_pdf(const Interval& range) const = 0;
    /// {x : log f(x) >= log_level}.
    virtual IntervalSet level_set(double log_level) const = 0;
    /// Probability of a set.
    virtual double mass(const IntervalSet& set) const;

    double pdf(double x) const { return std::exp(log_pdf(x)); }
    double sample(StreamRng& rng) const { return quantile(rng.uniform()); }
    Interval support() const { return {lower(), upper()}; }
    double sup_log_pdf(const IntervalSet& set) const;
    /// P(f(X) <= exp(log_level)).
    double probability_density_at_most(double log_level) const;
    /// P(f(X) <= f(x)): the density-contour plausibility of the point x.
    double contour_plausibility(double x) const;
};

/// C(mu, sigma) with closed-form level sets.
class CauchyDistribution final : public UnivariateDistribution {
public:
    explicit CauchyDistribution(CauchyParams params) : params_(params) {}

    const CauchyParams& params() const noexcept { return params_; }

    double log_pdf(double x) const override { return cauchy_im::log_pdf(x, params_); }
    double cdf(double x) const override { return cauchy_im::cdf(x, params_); }
    double quantile(double p) const override { return cauchy_im::quantile(p, params_); }
    double lower() const override { return -IntervalSet::kInf; }
    double upper() const override { return IntervalSet::kInf; }
    double sup_log_pdf(const Interval& range) const override;
    IntervalSet level_set(double log_level) const override;
    double mass(const IntervalSet& set) const override;

private:
    CauchyParams params_;
};

}  // namespace cauchy_im
