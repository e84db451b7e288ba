#pragma once

#include <span>

namespace cauchy_im {

/// Comparison of a sample of plausibility values with U(0, 1).
///
/// Validity asks for P(pl <= u) <= u for every u. The dominance statistic is the largest
/// violation sup_u (F_n(u) - u), tested one-sided; the KS pair tests exact uniformity.
struct UniformityStats {
    double ks_distance = 0.0;
    double ks_p = 1.0;
    double dominance_distance = 0.0;
    double dominance_p = 1.0;
};

UniformityStats uniformity_stats(std::span<const double> values);

/// Kolmogorov limiting survival function P(K > lambda).
double kolmogorov_survival(double lambda);

/// Asymptotic two-sided KS p-value for distance d at sample size n (Stephens' correction).
double ks_p_value(double d, std::size_t n);

/// Asymptotic one-sided Smirnov p-value exp(-2 n d^2).
double one_sided_p_value(double d, std::size_t n);

}  // namespace cauchy_im
