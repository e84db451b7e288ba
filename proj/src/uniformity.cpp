#include "cauchy_im/uniformity.hpp"

#include "cauchy_im/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cauchy_im {

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) {
        return 1.0;
    }
    if (lambda < 0.3) {
        // Alternating series converges slowly here; the value is 1 to double precision.
        return 1.0;
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-17) {
            break;
        }
    }
    return std::clamp(sum, 0.0, 1.0);
}

double ks_p_value(double d, std::size_t n) {
    const double rn = std::sqrt(static_cast<double>(n));
    return kolmogorov_survival((rn + 0.12 + 0.11 / rn) * d);
}

double one_sided_p_value(double d, std::size_t n) {
    if (d <= 0.0) {
        return 1.0;
    }
    return std::exp(-2.0 * static_cast<double>(n) * d * d);
}

UniformityStats uniformity_stats(std::span<const double> values) {
    if (values.empty()) {
        throw DomainError("uniformity_stats: empty sample");
    }
    std::vector<double> u(values.begin(), values.end());
    std::sort(u.begin(), u.end());
    const double n = static_cast<double>(u.size());
    double d_plus = 0.0, d_minus = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double x = std::clamp(u[i], 0.0, 1.0);
        d_plus = std::max(d_plus, static_cast<double>(i + 1) / n - x);
        d_minus = std::max(d_minus, x - static_cast<double>(i) / n);
    }
    UniformityStats s;
    s.ks_distance = std::max(d_plus, d_minus);
    s.ks_p = ks_p_value(s.ks_distance, u.size());
    s.dominance_distance = d_plus;
    s.dominance_p = one_sided_p_value(d_plus, u.size());
    return s;
}

}  // namespace cauchy_im
