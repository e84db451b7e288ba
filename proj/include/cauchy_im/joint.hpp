#pragma once

#include "cauchy_im/quadrature.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cauchy_im {

/// Order-statistic decomposition x(1), x(2) - x(1), and w_i = (x(i) - x(1)) / (x(2) - x(1)),
/// i = 3..n.
struct AncillaryDecomposition {
    double x1;
    double spacing;
    std::vector<double> w;  ///< nondecreasing, every entry >= 1

    std::size_t n() const noexcept { return w.size() + 2; }
};

/// Needs n >= 2 and x(1) < x(2) (DegenerateDataError on a tie at the bottom).
AncillaryDecomposition decompose(std::span<const double> data);

/// DomainError unless w has n - 2 finite, nondecreasing entries, all >= 1.
void check_ancillary(const std::vector<double>& w, std::size_t n, const std::string& who);

/// log of the integral over t of prod_k 1/(1 + (t + s v_k)^2). Groups of peaks far apart
/// are integrated in coordinates local to each group, so centers of order s cost no precision.
/// Uses the residue sum when its terms do not cancel badly, quadrature otherwise.
double log_lorentz_product(std::vector<double> v, double s, double rel_tol = 1e-12);

namespace detail {
/// The quadrature route alone.
double log_lorentz_product_quadrature(std::vector<double> v, double s, double rel_tol = 1e-12);
}  // namespace detail

/// Density of (T, S) = (U(1), U(2) - U(1)) given W = w, proportional to
/// s^{n-2} / ((1+t^2)(1+(t+s)^2) prod_i (1+(t+w_i s)^2)).
GridDensity2D joint_density_ts(const std::vector<double>& w, std::size_t n);

/// Joint IM for (mu, sigma) predicting (T, S) with the density-contour random set.
class JointIM {
public:
    explicit JointIM(std::span<const double> data);

    const AncillaryDecomposition& decomposition() const noexcept { return dec_; }
    const GridDensity2D& density() const noexcept { return density_; }

    /// (t0, s0) = ((x(1) - mu0) / sigma0, (x(2) - x(1)) / sigma0).
    std::pair<double, double> auxiliary_point(double mu0, double sigma0) const;
    /// P(f(T, S) <= f(t0, s0)).
    double plausibility(double mu0, double sigma0) const;
    /// (mu, sigma) whose auxiliary point is the density maximum.
    std::pair<double, double> mode_parameters() const;

private:
    AncillaryDecomposition dec_;
    GridDensity2D density_;
};

double joint_plausibility(std::span<const double> data, double mu0, double sigma0);

/// Plausibility contour tabulated on a (mu, sigma) grid; values are row-major with one row
/// per sigma grid point.
struct JointRegion {
    std::vector<double> mu_grid;
    std::vector<double> sigma_grid;
    std::vector<double> values;
    double level;
    std::vector<std::uint8_t> mask;  ///< values > 1 - level

    double at(std::size_t i_sigma, std::size_t j_mu) const { return values[i_sigma * mu_grid.size() + j_mu]; }
    /// Mask of {pl > 1 - level} for another level, from the same values.
    std::vector<std::uint8_t> mask_at(double level) const;
};

JointRegion joint_plausibility_region(std::span<const double> data, double level, const std::vector<double>& mu_grid,
                                      const std::vector<double>& sigma_grid, unsigned threads = 0);

}  // namespace cauchy_im
