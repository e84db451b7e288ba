#pragma once

#include "cauchy_im/im.hpp"
#include "cauchy_im/quadrature.hpp"

#include <memory>
#include <span>
#include <vector>

namespace cauchy_im {

/// Weights a defining T = sum a_i U_i; they sum to one and a_1 != 0.
class WeightVector {
public:
    explicit WeightVector(std::vector<double> a);

    /// a = (1, 0, ..., 0), so that T = U_1.
    static WeightVector first(std::size_t n);
    /// a = (1/n, ..., 1/n).
    static WeightVector equal(std::size_t n);

    const std::vector<double>& values() const noexcept { return a_; }
    std::size_t size() const noexcept { return a_.size(); }
    /// sum a_i x_i.
    double combine(std::span<const double> x) const;

private:
    std::vector<double> a_;
};

/// Density of U_1 given W = ((x_i - x_1) / sigma)_{i >= 2}, proportional to
/// 1/(1+u^2) prod_{i>=2} 1/(1+(u+w_i)^2). Data are used in the order given.
GridDensity conditional_density_u1(std::span<const double> data, double sigma_known);

/// Density of T = sum a_i U_i given W: prod_{k=1..n} 1/(1+(t + r_k)^2) with
/// r_k = (x_k - sum a_j x_j) / sigma.
GridDensity conditional_density_t(std::span<const double> data, double sigma_known, const WeightVector& weights);

/// Conditional IM for mu with sigma known: predicts T with a nested random set and maps it
/// through mu = sum a_i x_i - sigma t.
class ConditionalIM {
public:
    ConditionalIM(std::vector<double> data, double sigma_known);
    ConditionalIM(std::vector<double> data, double sigma_known, const WeightVector& weights);

    const std::shared_ptr<const GridDensity>& density() const noexcept { return density_; }
    MonotoneMap map() const;
    RandomSetSpec random_set(RandomSetKind kind) const;

    BeliefPlausibility evaluate(const Assertion& assertion, RandomSetKind kind) const;
    /// pl({mu0}).
    double plausibility(double mu0, RandomSetKind kind) const;
    PlausibilityCurve curve(const std::vector<double>& grid, RandomSetKind kind) const;
    /// Plausibility interval at `level`, bracketed on a grid spanning the data.
    Interval interval(double level, RandomSetKind kind) const;

private:
    std::vector<double> data_;
    double sigma_;
    double anchor_;  // sum a_i x_i
    std::shared_ptr<const GridDensity> density_;
};

BeliefPlausibility cim_plausibility_mu(std::span<const double> data, double sigma_known, const Assertion& assertion,
                                       RandomSetKind kind);
PlausibilityCurve cim_curve(std::span<const double> data, double sigma_known, const std::vector<double>& grid,
                            RandomSetKind kind);

}  // namespace cauchy_im
