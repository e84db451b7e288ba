#include "cauchy_im/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>

namespace cauchy_im {

double UnivariateDistribution::mass(const IntervalSet& set) const {
    double total = 0.0;
    const IntervalSet clipped = set.intersect(support());
    for (const auto& p : clipped.parts()) {
        total += cdf(p.upper) - cdf(p.lower);
    }
    return std::clamp(total, 0.0, 1.0);
}

double UnivariateDistribution::sup_log_pdf(const IntervalSet& set) const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : set.parts()) {
        best = std::max(best, sup_log_pdf(p));
    }
    return best;
}

double UnivariateDistribution::probability_density_at_most(double log_level) const {
    if (log_level >= sup_log_pdf(support())) {
        return 1.0;
    }
    const IntervalSet above = level_set(log_level);
    return mass(above.complement(support()));
}

double UnivariateDistribution::contour_plausibility(double x) const {
    return probability_density_at_most(log_pdf(x));
}

double CauchyDistribution::sup_log_pdf(const Interval& range) const {
    if (range.lower > range.upper) {
        return -std::numeric_limits<double>::infinity();
    }
    return log_pdf(std::clamp(params_.mu(), range.lower, range.upper));
}

IntervalSet CauchyDistribution::level_set(double log_level) const {
    // log f >= L  <=>  1 + z^2 <= exp(-L - log(pi sigma))
    const double log_k = -log_level - std::log(std::numbers::pi * params_.sigma());
    if (log_k < 0.0) {
        return {};
    }
    const double radius = params_.sigma() * std::sqrt(std::expm1(log_k));
    return IntervalSet({{params_.mu() - radius, params_.mu() + radius}});
}

double CauchyDistribution::mass(const IntervalSet& set) const {
    double total = 0.0;
    for (const auto& p : set.parts()) {
        if (p.lower >= params_.mu()) {
            total += survival(p.lower, params_) - survival(p.upper, params_);
        } else {
            total += cauchy_im::cdf(p.upper, params_) - cauchy_im::cdf(p.lower, params_);
        }
    }
    return std::clamp(total, 0.0, 1.0);
}

}  // namespace cauchy_im
