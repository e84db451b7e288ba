#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cauchy_im {

/// Location-scale parameter (mu, sigma) of C(mu, sigma).
class CauchyParams {
public:
    CauchyParams(double mu, double sigma);

    static CauchyParams standard() { return {0.0, 1.0}; }

    double mu() const noexcept { return mu_; }
    double sigma() const noexcept { return sigma_; }

    friend bool operator==(const CauchyParams&, const CauchyParams&) = default;

private:
    double mu_;
    double sigma_;
};

double pdf(double x, const CauchyParams& params);
double log_pdf(double x, const CauchyParams& params);
double cdf(double x, const CauchyParams& params);
/// Upper tail 1 - cdf, computed without cancellation.
double survival(double x, const CauchyParams& params);
double quantile(double p, const CauchyParams& params);

/// n iid draws by inversion; (seed, stream) fully determines the output.
std::vector<double> sample(std::size_t n, const CauchyParams& params, std::uint64_t seed,
                           std::uint64_t stream = 0);

/// Real coefficients of y -> (a y + b) / (c y + d).
class MobiusCoeffs {
public:
    MobiusCoeffs(double a, double b, double c, double d);

    static MobiusCoeffs identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static MobiusCoeffs reciprocal() { return {0.0, 1.0, 1.0, 0.0}; }

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double c() const noexcept { return c_; }
    double d() const noexcept { return d_; }

    double determinant() const noexcept { return a_ * d_ - b_ * c_; }
    double apply(double y) const noexcept { return (a_ * y + b_) / (c_ * y + d_); }

    /// Coefficients of this ∘ inner.
    MobiusCoeffs compose(const MobiusCoeffs& inner) const;
    MobiusCoeffs inverse() const;

private:
    double a_, b_, c_, d_;
};

/// Parameters of the image distribution: theta* = (a theta + b)/(c theta + d) with
/// theta = mu + i sigma, returned as (Re theta*, |Im theta*|).
CauchyParams mobius_transform(const CauchyParams& params, const MobiusCoeffs& coeffs);

/// Element-wise Möbius map; throws DomainError naming the index that hits the pole.
std::vector<double> transform_data(std::span<const double> data, const MobiusCoeffs& coeffs);

}  // namespace cauchy_im
