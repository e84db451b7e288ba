#include "cauchy_im/cauchy.hpp"

#include "cauchy_im/errors.hpp"
#include "cauchy_im/rng.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace cauchy_im {

CauchyParams::CauchyParams(double mu, double sigma) : mu_(mu), sigma_(sigma) {
    if (!std::isfinite(mu) || !std::isfinite(sigma) || !(sigma > 0.0)) {
        throw DomainError("CauchyParams requires finite mu and finite sigma > 0");
    }
}

double pdf(double x, const CauchyParams& params) {
    const double z = (x - params.mu()) / params.sigma();
    return 1.0 / (std::numbers::pi * params.sigma() * (1.0 + z * z));
}

double log_pdf(double x, const CauchyParams& params) {
    const double z = (x - params.mu()) / params.sigma();
    const double az = std::abs(z);
    const double log_tail = az > 1e150 ? 2.0 * std::log(az) : std::log1p(z * z);
    return -std::log(std::numbers::pi * params.sigma()) - log_tail;
}

namespace {

// F(z) for the standard Cauchy. For z < -1 use arctan(-1/z)/pi so the lower tail keeps
// full relative precision.
double standard_cdf(double z) {
    if (std::isinf(z)) {
        return z < 0 ? 0.0 : 1.0;
    }
    if (z < -1.0) {
        return std::atan(-1.0 / z) / std::numbers::pi;
    }
    return std::atan(z) / std::numbers::pi + 0.5;
}

}  // namespace

double cdf(double x, const CauchyParams& params) {
    return standard_cdf((x - params.mu()) / params.sigma());
}

double survival(double x, const CauchyParams& params) {
    return standard_cdf(-(x - params.mu()) / params.sigma());
}

double quantile(double p, const CauchyParams& params) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("quantile requires 0 < p < 1");
    }
    if (p == 0.5) {
        return params.mu();
    }
    // tan(pi (p - 1/2)) = -1 / tan(pi p); the latter keeps precision for small p.
    const double z = p < 0.5 ? -1.0 / std::tan(std::numbers::pi * p) : 1.0 / std::tan(std::numbers::pi * (1.0 - p));
    return params.mu() + params.sigma() * z;
}

std::vector<double> sample(std::size_t n, const CauchyParams& params, std::uint64_t seed, std::uint64_t stream) {
    if (n == 0) {
        throw DomainError("sample requires n >= 1");
    }
    StreamRng rng(seed, stream);
    std::vector<double> out(n);
    for (auto& x : out) {
        x = quantile(rng.uniform(), params);
    }
    return out;
}

MobiusCoeffs::MobiusCoeffs(double a, double b, double c, double d) : a_(a), b_(b), c_(c), d_(d) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(d)) {
        throw DomainError("Mobius coefficients must be finite");
    }
    if (a * d - b * c == 0.0) {
        throw DomainError("degenerate Mobius coefficients: ad - bc = 0");
    }
}

MobiusCoeffs MobiusCoeffs::compose(const MobiusCoeffs& inner) const {
    // Matrix product [a b; c d] * [a' b'; c' d'].
    return {a_ * inner.a_ + b_ * inner.c_, a_ * inner.b_ + b_ * inner.d_, c_ * inner.a_ + d_ * inner.c_,
            c_ * inner.b_ + d_ * inner.d_};
}

MobiusCoeffs MobiusCoeffs::inverse() const { return {d_, -b_, -c_, a_}; }

CauchyParams mobius_transform(const CauchyParams& params, const MobiusCoeffs& coeffs) {
    const std::complex<double> theta(params.mu(), params.sigma());
    // c theta + d vanishes only if c = d = 0, which the determinant check excludes.
    const std::complex<double> image = (coeffs.a() * theta + coeffs.b()) / (coeffs.c() * theta + coeffs.d());
    return {image.real(), std::abs(image.imag())};
}

std::vector<double> transform_data(std::span<const double> data, const MobiusCoeffs& coeffs) {
    std::vector<double> out;
    out.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double denom = coeffs.c() * data[i] + coeffs.d();
        if (denom == 0.0) {
            throw DomainError("transform_data: data[" + std::to_string(i) + "] hits the pole -d/c");
        }
        out.push_back((coeffs.a() * data[i] + coeffs.b()) / denom);
    }
    return out;
}

}  // namespace cauchy_im
