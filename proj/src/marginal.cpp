#include "cauchy_im/marginal.hpp"

#include "cauchy_im/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <string>

namespace cauchy_im {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log1p_square(double z) { return std::abs(z) > 1e150 ? 2.0 * std::log(std::abs(z)) : std::log1p(z * z); }

std::vector<double> sorted_finite(std::span<const double> data, const char* who) {
    if (data.size() < 2) {
        throw DomainError(std::string(who) + ": needs n >= 2");
    }
    std::vector<double> x(data.begin(), data.end());
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw DomainError(std::string(who) + ": data must be finite");
        }
    }
    std::sort(x.begin(), x.end());
    if (!(x[1] > x[0])) {
        throw DegenerateDataError(std::string(who) + ": tie between the two smallest observations");
    }
    return x;
}

Interval hull_of_image(const MonotoneMap& map, const RandomSetSpec& rs, double level) {
    if (!(level >= 0.0 && level <= 1.0)) {
        throw DomainError("marginal interval: level must lie in [0, 1]");
    }
    const IntervalSet region = map.image(rs.level_region(1.0 - level));
    if (region.empty()) {
        throw DomainError("marginal interval: empty region");
    }
    return region.hull();
}

// With a_j = c_j^2 the integrand is (s^2)^q prod_j 1/(1 + a_j s^2) times s^{n-1-2q}; partial
// fractions in s^2 leave sum_j g(a_j) / prod_{k != j} (a_j - a_k) up to a constant, with
// g(a) = a^p log a for even n (p = (n-2)/2) and g(a) = a^{q-1/2} for odd n (q = (n-1)/2).
// Returns NaN when the alternating sum could lose more than rel_tol.
double power_rational_fractions(const std::vector<double>& c, double rel_tol) {
    using real = long double;
    const std::size_t n = c.size();
    const bool even = n % 2 == 0;
    const real half = even ? 0.5L * (static_cast<real>(n) - 2.0L) : 0.5L * (static_cast<real>(n) - 1.0L);
    const real eps = std::numeric_limits<real>::epsilon();
    std::vector<real> log_mod(n), sign(n), err(n);
    for (std::size_t j = 0; j < n; ++j) {
        const real cj = c[j];
        const real log_abs_c = std::log(std::abs(cj));
        if (!std::isfinite(log_abs_c)) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        const real log_a = 2.0L * log_abs_c;
        real lm, sg = 1.0L, e = 4.0L * static_cast<real>(n) * eps;
        if (even) {
            if (log_a == 0.0L) {
                return std::numeric_limits<double>::quiet_NaN();
            }
            lm = half * log_a + std::log(std::abs(log_a));
            sg = log_a < 0.0L ? -1.0L : 1.0L;
            e += eps / std::abs(log_a);
        } else {
            lm = (half - 0.5L) * log_a;
        }
        for (std::size_t k = 0; k < n; ++k) {
            if (k == j) {
                continue;
            }
            const real ck = c[k];
            const real dm = cj - ck, dp = cj + ck;
            if (dm == 0.0L || dp == 0.0L) {
                return std::numeric_limits<double>::quiet_NaN();
            }
            lm -= std::log(std::abs(dm)) + std::log(std::abs(dp));
            sg *= (dm < 0.0L) == (dp < 0.0L) ? 1.0L : -1.0L;
            e += eps * (std::abs(cj) + std::abs(ck)) * (1.0L / std::abs(dm) + 1.0L / std::abs(dp));
        }
        log_mod[j] = lm;
        sign[j] = sg;
        err[j] = e;
    }
    const real top = *std::max_element(log_mod.begin(), log_mod.end());
    real sum = 0.0L, bound = 0.0L;
    for (std::size_t j = 0; j < n; ++j) {
        const real m = std::exp(log_mod[j] - top);
        sum += sign[j] * m;
        bound += m * err[j];
    }
    // overall constant: (-1)^half / 2 for even n, (-1)^half pi / 2 for odd n
    const bool flip = static_cast<long>(half) % 2 == 1;
    if (flip) {
        sum = -sum;
    }
    if (!(sum > 0.0L) || bound / sum > static_cast<real>(rel_tol)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return static_cast<double>((even ? std::log(0.5L) : std::log(0.5L * std::numbers::pi_v<real>)) + top + std::log(sum));
}

}  // namespace

double log_power_rational(const std::vector<double>& c, double rel_tol) {
    if (c.empty()) {
        throw DomainError("log_power_rational: needs at least one coefficient");
    }
    if (const double r = power_rational_fractions(c, rel_tol); !std::isnan(r)) {
        return r;
    }
    return detail::log_power_rational_trapezoid(c);
}

double detail::log_power_rational_trapezoid(const std::vector<double>& c) {
    const double n = static_cast<double>(c.size());
    double lo = kInf, hi = -kInf;
    std::size_t zeros = 0;
    for (double cj : c) {
        if (cj != 0.0) {
            const double b = -std::log(std::abs(cj));
            lo = std::min(lo, b);
            hi = std::max(hi, b);
        } else {
            ++zeros;
        }
    }
    if (2 * zeros >= c.size()) {
        return kInf;
    }
    // past the outermost breakpoints the log-integrand is linear with slopes n and 2 zeros - n
    constexpr double kDrop = 45.0, kStep = 0.125;
    lo -= kDrop / n;
    hi += kDrop / (n - 2.0 * static_cast<double>(zeros));
    const auto steps = static_cast<std::size_t>(std::ceil((hi - lo) / kStep));
    std::vector<double> vals(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        const double tau = lo + kStep * static_cast<double>(i);
        const double s = std::exp(tau);
        double v = n * tau;
        for (double cj : c) {
            v -= log1p_square(cj * s);
        }
        vals[i] = v;
    }
    const double top = *std::max_element(vals.begin(), vals.end());
    double sum = 0.0;
    for (double v : vals) {
        sum += std::exp(v - top);
    }
    return top + std::log(sum * kStep);
}

double detail::log_power_rational_quadrature(const std::vector<double>& c, double rel_tol) {
    const double n = static_cast<double>(c.size());
    std::vector<double> bps;
    std::size_t zeros = 0;
    for (double cj : c) {
        if (cj != 0.0) {
            bps.push_back(-std::log(std::abs(cj)));
        } else {
            ++zeros;
        }
    }
    // The integrand grows like s^{2 zeros - n - 1} at infinity.
    if (2 * zeros >= c.size()) {
        return kInf;
    }
    std::vector<double> sorted = bps;
    std::sort(sorted.begin(), sorted.end());
    QuadratureOptions opts;
    opts.rel_tol = rel_tol;
    opts.center = sorted[sorted.size() / 2];
    opts.scale = 2.0;
    opts.breakpoints = std::move(bps);
    return log_integrate_real_line(
        [&](double tau) {
            const double s = std::exp(tau);
            double v = n * tau;
            for (double cj : c) {
                v -= log1p_square(cj * s);
            }
            return v;
        },
        opts);
}

std::string to_string(MarginalTarget target) {
    switch (target) {
        case MarginalTarget::S: return "S";
        case MarginalTarget::M: return "M";
        case MarginalTarget::G: return "G";
        case MarginalTarget::Z: return "Z";
    }
    return "?";
}

MarginalDensity marginal_density_s(const std::vector<double>& w, std::size_t n) {
    check_ancillary(w, n, "marginal_density_s");
    const double power = static_cast<double>(n) - 2.0;
    std::vector<double> v{0.0, 1.0};
    v.insert(v.end(), w.begin(), w.end());
    auto log_f = [v, power](double s) {
        if (!(s > 0.0)) {
            return -kInf;
        }
        return (power > 0.0 ? power * std::log(s) : 0.0) + log_lorentz_product(v, s);
    };
    DensityOptions opts;
    opts.scale = 1.0;
    auto g = std::make_shared<GridDensity>(normalize(log_f, Domain::positive_half_line, opts));
    return {MarginalTarget::S, std::move(g), w};
}

MarginalDensity marginal_density_m(const std::vector<double>& w, std::size_t n) {
    check_ancillary(w, n, "marginal_density_m");
    auto log_f = [w](double m) {
        std::vector<double> c{m, m + 1.0};
        for (double wi : w) {
            c.push_back(m + wi);
        }
        return log_power_rational(c);
    };
    DensityOptions opts;
    opts.center = -1.0;
    opts.scale = 0.5;
    opts.breakpoints = {0.0, -1.0};
    for (double wi : w) {
        opts.breakpoints.push_back(-wi);
    }
    auto g = std::make_shared<GridDensity>(normalize(log_f, Domain::real_line, opts));
    return {MarginalTarget::M, std::move(g), w};
}

MarginalDensity g_density(std::span<const double> data) {
    const std::vector<double> x = sorted_finite(data, "g_density");
    const double n = static_cast<double>(x.size());
    // u = x(1) + g y turns the u-integral into g times an integral over y, with peaks at
    // y = (x(i) - x(1)) / g.
    std::vector<double> v;
    for (double xi : x) {
        v.push_back((xi - x[0]) / (x[1] - x[0]));
    }
    auto log_f = [v, n, d = x[1] - x[0]](double g) {
        if (!(g > 0.0)) {
            return -kInf;
        }
        return -n * std::log(g) + log_lorentz_product(v, d / g);
    };
    DensityOptions opts;
    opts.scale = x[1] - x[0];
    auto g = std::make_shared<GridDensity>(normalize(log_f, Domain::positive_half_line, opts));
    return {MarginalTarget::G, std::move(g), decompose(x).w};
}

MarginalDensity z_density(std::span<const double> data) {
    const std::vector<double> x = sorted_finite(data, "z_density");
    // s = 1/u turns the s-integral into the same power-rational form as the M density.
    auto log_f = [x](double z) {
        std::vector<double> c;
        for (double xi : x) {
            c.push_back(z - xi);
        }
        return log_power_rational(c);
    };
    DensityOptions opts;
    opts.center = x[x.size() / 2];
    opts.scale = x[1] - x[0];
    opts.breakpoints = x;
    auto g = std::make_shared<GridDensity>(normalize(log_f, Domain::real_line, opts));
    return {MarginalTarget::Z, std::move(g), decompose(x).w};
}

// ---------------------------------------------------------------------------------------

MarginalSigmaIM::MarginalSigmaIM(std::span<const double> data)
    : dec_(decompose(data)), density_(marginal_density_s(dec_.w, dec_.n())) {}

MonotoneMap MarginalSigmaIM::map() const { return MonotoneMap::reciprocal_scale(dec_.spacing); }

RandomSetSpec MarginalSigmaIM::random_set(RandomSetKind kind) const { return RandomSetSpec(kind, density_.density); }

double MarginalSigmaIM::plausibility(double sigma0, RandomSetKind kind) const {
    if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) {
        throw DomainError("marginal plausibility: sigma0 must be positive and finite");
    }
    return random_set(kind).containment_probability(dec_.spacing / sigma0);
}

BeliefPlausibility MarginalSigmaIM::evaluate(const Assertion& assertion, RandomSetKind kind) const {
    return belief_and_plausibility(map(), assertion, random_set(kind));
}

Interval MarginalSigmaIM::interval(double level, RandomSetKind kind) const {
    return hull_of_image(map(), random_set(kind), level);
}

MarginalMuIM::MarginalMuIM(std::span<const double> data)
    : dec_(decompose(data)), density_(marginal_density_m(dec_.w, dec_.n())) {}

MonotoneMap MarginalMuIM::map() const { return MonotoneMap::location_ratio(dec_.x1, dec_.spacing); }

RandomSetSpec MarginalMuIM::random_set(RandomSetKind kind) const { return RandomSetSpec(kind, density_.density); }

double MarginalMuIM::plausibility(double mu0, RandomSetKind kind) const {
    if (!std::isfinite(mu0)) {
        throw DomainError("marginal plausibility: mu0 must be finite");
    }
    return random_set(kind).containment_probability((dec_.x1 - mu0) / dec_.spacing);
}

BeliefPlausibility MarginalMuIM::evaluate(const Assertion& assertion, RandomSetKind kind) const {
    return belief_and_plausibility(map(), assertion, random_set(kind));
}

Interval MarginalMuIM::interval(double level, RandomSetKind kind) const {
    return hull_of_image(map(), random_set(kind), level);
}

double marginal_plausibility_sigma(std::span<const double> data, double sigma0, RandomSetKind kind) {
    if (!(sigma0 > 0.0)) {
        throw DomainError("marginal plausibility: sigma0 must be positive");
    }
    return MarginalSigmaIM(data).plausibility(sigma0, kind);
}

Interval marginal_interval_sigma(std::span<const double> data, double level, RandomSetKind kind) {
    return MarginalSigmaIM(data).interval(level, kind);
}

double marginal_plausibility_mu(std::span<const double> data, double mu0, RandomSetKind kind) {
    return MarginalMuIM(data).plausibility(mu0, kind);
}

Interval marginal_interval_mu(std::span<const double> data, double level, RandomSetKind kind) {
    return MarginalMuIM(data).interval(level, kind);
}

}  // namespace cauchy_im
