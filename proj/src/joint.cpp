#include "cauchy_im/joint.hpp"

#include "cauchy_im/errors.hpp"
#include "cauchy_im/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace cauchy_im {

AncillaryDecomposition decompose(std::span<const double> data) {
    if (data.size() < 2) {
        throw DomainError("decompose: needs n >= 2");
    }
    for (double x : data) {
        if (!std::isfinite(x)) {
            throw DomainError("decompose: data must be finite");
        }
    }
    std::vector<double> x(data.begin(), data.end());
    std::sort(x.begin(), x.end());
    const double d = x[1] - x[0];
    if (!(d > 0.0)) {
        throw DegenerateDataError("decompose: tie between the two smallest observations");
    }
    AncillaryDecomposition dec{x[0], d, {}};
    for (std::size_t i = 2; i < x.size(); ++i) {
        dec.w.push_back(std::max(1.0, (x[i] - x[0]) / d));
    }
    return dec;
}

void check_ancillary(const std::vector<double>& w, std::size_t n, const std::string& who) {
    if (n < 2 || w.size() != n - 2) {
        throw DomainError(who + ": w must have n - 2 entries");
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!(w[i] >= 1.0) || !std::isfinite(w[i]) || (i > 0 && w[i] < w[i - 1])) {
            throw DomainError(who + ": w must be finite, nondecreasing and >= 1");
        }
    }
}

namespace {

// pi Re sum_k prod_{j != k} 1/(D (D + 2i)), D = s (v_j - v_k): residues at the upper poles.
// Terms are carried as log-modulus and phase. Returns NaN when cancellation between the terms
// could cost more than rel_tol.
double lorentz_residues(const std::vector<double>& v, double s, double rel_tol) {
    using real = long double;
    const std::size_t n = v.size();
    std::vector<real> log_mod(n, 0.0L), phase(n, 0.0L);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j == k) {
                continue;
            }
            const real d = static_cast<real>(s) * (static_cast<real>(v[j]) - static_cast<real>(v[k]));
            if (d == 0.0L) {
                return std::numeric_limits<double>::quiet_NaN();
            }
            log_mod[k] -= std::log(std::abs(d)) + 0.5L * std::log(d * d + 4.0L);
            phase[k] -= (d < 0.0L ? std::numbers::pi_v<real> : 0.0L) + std::atan2(2.0L, d);
        }
    }
    const real top = *std::max_element(log_mod.begin(), log_mod.end());
    real re = 0.0L, mod = 0.0L;
    for (std::size_t k = 0; k < n; ++k) {
        const real m = std::exp(log_mod[k] - top);
        re += m * std::cos(phase[k]);
        mod += m;
    }
    const real eps = std::numeric_limits<real>::epsilon();
    if (!(re > 0.0L) || mod / re * 8.0L * static_cast<real>(n) * eps > static_cast<real>(rel_tol)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return static_cast<double>(std::log(std::numbers::pi_v<real>) + top + std::log(re));
}

}  // namespace

double log_lorentz_product(std::vector<double> v, double s, double rel_tol) {
    if (v.empty() || !(s >= 0.0)) {
        throw DomainError("log_lorentz_product: needs centers and s >= 0");
    }
    if (std::isinf(s)) {
        return v.size() == 1 ? std::log(std::numbers::pi) : -std::numeric_limits<double>::infinity();
    }
    if (const double r = lorentz_residues(v, s, rel_tol); !std::isnan(r)) {
        return r;
    }
    return detail::log_lorentz_product_quadrature(std::move(v), s, rel_tol);
}

double detail::log_lorentz_product_quadrature(std::vector<double> v, double s, double rel_tol) {
    if (v.empty() || !(s >= 0.0) || std::isinf(s)) {
        throw DomainError("log_lorentz_product: needs centers and finite s >= 0");
    }
    // t = -y puts the peaks at y = s v_k.
    std::sort(v.begin(), v.end());
    constexpr double kGap = 16.0;
    std::vector<std::size_t> starts{0};
    for (std::size_t k = 1; k < v.size(); ++k) {
        if (s * (v[k] - v[k - 1]) > kGap) {
            starts.push_back(k);
        }
    }
    starts.push_back(v.size());
    std::vector<double> logs;
    for (std::size_t c = 0; c + 1 < starts.size(); ++c) {
        const std::size_t first = starts[c], last = starts[c + 1] - 1;
        std::vector<double> offsets(v.size());
        for (std::size_t k = 0; k < v.size(); ++k) {
            offsets[k] = s * (v[k] - v[first]);
        }
        const double lo = c == 0 ? -std::numeric_limits<double>::infinity() : -0.5 * s * (v[first] - v[first - 1]);
        const double hi = last + 1 == v.size() ? std::numeric_limits<double>::infinity()
                                               : offsets[last] + 0.5 * s * (v[last + 1] - v[last]);
        QuadratureOptions opts;
        opts.rel_tol = rel_tol;
        opts.center = 0.5 * offsets[last];
        opts.scale = 1.0;
        opts.breakpoints.assign(offsets.begin() + static_cast<std::ptrdiff_t>(first),
                                offsets.begin() + static_cast<std::ptrdiff_t>(last) + 1);
        logs.push_back(log_integrate_interval(
            [&](double z) {
                double r = 0.0;
                for (double o : offsets) {
                    const double d = z - o;
                    r -= std::abs(d) > 1e150 ? 2.0 * std::log(std::abs(d)) : std::log1p(d * d);
                }
                return r;
            },
            lo, hi, opts));
    }
    const double top = *std::max_element(logs.begin(), logs.end());
    if (!std::isfinite(top)) {
        return top;
    }
    double sum = 0.0;
    for (double l : logs) {
        sum += std::exp(l - top);
    }
    return top + std::log(sum);
}

GridDensity2D joint_density_ts(const std::vector<double>& w, std::size_t n) {
    check_ancillary(w, n, "joint_density_ts");
    const double power = static_cast<double>(n) - 2.0;
    auto kernel = [w, power](double t, double s) {
        double v = (power > 0.0 ? power * std::log(s) : 0.0) - std::log1p(t * t) - std::log1p((t + s) * (t + s));
        for (double wi : w) {
            const double z = t + wi * s;
            v -= std::log1p(z * z);
        }
        return v;
    };
    auto centers = [w](double s) {
        std::vector<double> c{0.0, -s};
        for (double wi : w) {
            c.push_back(-wi * s);
        }
        return c;
    };
    GridDensity2D::Options opts;
    opts.s_scale = 1.0;
    opts.inner_scale = 1.0;
    return GridDensity2D(kernel, centers, opts);
}

JointIM::JointIM(std::span<const double> data)
    : dec_(decompose(data)), density_(joint_density_ts(dec_.w, dec_.n())) {}

std::pair<double, double> JointIM::auxiliary_point(double mu0, double sigma0) const {
    if (!(sigma0 > 0.0) || !std::isfinite(sigma0) || !std::isfinite(mu0)) {
        throw DomainError("joint plausibility: sigma0 must be positive and finite");
    }
    return {(dec_.x1 - mu0) / sigma0, dec_.spacing / sigma0};
}

double JointIM::plausibility(double mu0, double sigma0) const {
    const auto [t0, s0] = auxiliary_point(mu0, sigma0);
    return density_.contour_plausibility(t0, s0);
}

std::pair<double, double> JointIM::mode_parameters() const {
    const auto [t, s] = density_.mode();
    const double sigma = dec_.spacing / s;
    return {dec_.x1 - sigma * t, sigma};
}

double joint_plausibility(std::span<const double> data, double mu0, double sigma0) {
    return JointIM(data).plausibility(mu0, sigma0);
}

std::vector<std::uint8_t> JointRegion::mask_at(double lvl) const {
    std::vector<std::uint8_t> m(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        m[i] = values[i] > 1.0 - lvl;
    }
    return m;
}

JointRegion joint_plausibility_region(std::span<const double> data, double level, const std::vector<double>& mu_grid,
                                      const std::vector<double>& sigma_grid, unsigned threads) {
    if (!(level >= 0.0 && level <= 1.0)) {
        throw DomainError("joint_plausibility_region: level must lie in [0, 1]");
    }
    if (mu_grid.empty() || sigma_grid.empty()) {
        throw DomainError("joint_plausibility_region: empty grid");
    }
    for (double s : sigma_grid) {
        if (!(s > 0.0)) {
            throw DomainError("joint_plausibility_region: sigma grid must be positive");
        }
    }
    const JointIM im(data);
    JointRegion r{mu_grid, sigma_grid, {}, level, {}};
    const std::size_t cols = mu_grid.size();
    r.values = parallel_map<double>(mu_grid.size() * sigma_grid.size(), threads, [&](std::size_t k) {
        return im.plausibility(mu_grid[k % cols], sigma_grid[k / cols]);
    });
    r.mask = r.mask_at(level);
    return r;
}

}  // namespace cauchy_im
