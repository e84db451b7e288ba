#pragma once

#include "cauchy_im/im.hpp"
#include "cauchy_im/joint.hpp"
#include "cauchy_im/quadrature.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cauchy_im {

/// S = U(2) - U(1), M = T / S, and the propagated endpoints G = d / S and Z = x(1) - d M,
/// with d = x(2) - x(1).
enum class MarginalTarget { S, M, G, Z };

std::string to_string(MarginalTarget target);

struct MarginalDensity {
    MarginalTarget target;
    std::shared_ptr<const GridDensity> density;
    std::vector<double> w;  ///< conditioning ancillary
};

/// f(s | w) proportional to s^{n-2} times the integral over t of the joint kernel.
MarginalDensity marginal_density_s(const std::vector<double>& w, std::size_t n);

/// f(m | w) proportional to the integral over s > 0 of
/// s^{n-1} / ((1+m^2 s^2)(1+(m+1)^2 s^2) prod_i (1+(m+w_i)^2 s^2)).
MarginalDensity marginal_density_m(const std::vector<double>& w, std::size_t n);

/// f(g | data) proportional to g^{-(n+1)} times the integral over u of prod_i 1/(1+(x_i-u)^2/g^2).
MarginalDensity g_density(std::span<const double> data);

/// f(z | data) proportional to the integral over s > 0 of s^{-n-1} prod_i 1/(1+(z-x_i)^2/s^2).
MarginalDensity z_density(std::span<const double> data);

/// log of the integral over s > 0 of s^{n-1} prod_j 1/(1 + c_j^2 s^2), n = c.size(); +inf when
/// half or more of the c_j vanish. Partial fractions when they do not cancel badly, a
/// trapezoid rule in log s otherwise.
double log_power_rational(const std::vector<double>& c, double rel_tol = 1e-12);

namespace detail {
/// The adaptive quadrature route alone.
double log_power_rational_quadrature(const std::vector<double>& c, double rel_tol = 1e-12);
/// Fixed-step trapezoid rule in log s. The integrand is analytic in a strip of half-width
/// pi/2 around the real axis; a step of 1/8 keeps the error below 1e-12 even when all
/// the c_j coincide.
double log_power_rational_trapezoid(const std::vector<double>& c);
}  // namespace detail

/// Marginal IM for sigma: sigma = d / S.
class MarginalSigmaIM {
public:
    explicit MarginalSigmaIM(std::span<const double> data);

    const AncillaryDecomposition& decomposition() const noexcept { return dec_; }
    const MarginalDensity& density() const noexcept { return density_; }
    MonotoneMap map() const;
    RandomSetSpec random_set(RandomSetKind kind) const;

    /// Plausibility of {sigma0}; DomainError unless sigma0 > 0.
    double plausibility(double sigma0, RandomSetKind kind = RandomSetKind::density_contour) const;
    BeliefPlausibility evaluate(const Assertion& assertion, RandomSetKind kind = RandomSetKind::density_contour) const;
    /// {sigma : pl(sigma) > 1 - level}, as its closed hull. With one_sided_lower this is (0, G_level].
    Interval interval(double level, RandomSetKind kind = RandomSetKind::density_contour) const;

private:
    AncillaryDecomposition dec_;
    MarginalDensity density_;
};

/// Marginal IM for mu: mu = x(1) - d M.
class MarginalMuIM {
public:
    explicit MarginalMuIM(std::span<const double> data);

    const AncillaryDecomposition& decomposition() const noexcept { return dec_; }
    const MarginalDensity& density() const noexcept { return density_; }
    MonotoneMap map() const;
    RandomSetSpec random_set(RandomSetKind kind) const;

    double plausibility(double mu0, RandomSetKind kind = RandomSetKind::density_contour) const;
    BeliefPlausibility evaluate(const Assertion& assertion, RandomSetKind kind = RandomSetKind::density_contour) const;
    /// {mu : pl(mu) > 1 - level}, as its closed hull.
    Interval interval(double level, RandomSetKind kind = RandomSetKind::density_contour) const;

private:
    AncillaryDecomposition dec_;
    MarginalDensity density_;
};

double marginal_plausibility_sigma(std::span<const double> data, double sigma0,
                                   RandomSetKind kind = RandomSetKind::density_contour);
Interval marginal_interval_sigma(std::span<const double> data, double level,
                                 RandomSetKind kind = RandomSetKind::density_contour);
double marginal_plausibility_mu(std::span<const double> data, double mu0,
                                RandomSetKind kind = RandomSetKind::density_contour);
Interval marginal_interval_mu(std::span<const double> data, double level,
                              RandomSetKind kind = RandomSetKind::density_contour);

}  // namespace cauchy_im
