#include "cauchy_im/im.hpp"

#include "cauchy_im/cauchy.hpp"
#include "cauchy_im/errors.hpp"
#include "cauchy_im/parallel.hpp"
#include "cauchy_im/quadrature.hpp"
#include "cauchy_im/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cauchy_im {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(RandomSetKind kind) {
    switch (kind) {
        case RandomSetKind::cdf_centered: return "cdf_centered";
        case RandomSetKind::one_sided_lower: return "one_sided_lower";
        case RandomSetKind::one_sided_upper: return "one_sided_upper";
        case RandomSetKind::density_contour: return "density_contour";
    }
    return "unknown";
}

RandomSetKind parse_random_set_kind(const std::string& name) {
    std::string key = name;
    std::replace(key.begin(), key.end(), '-', '_');
    if (key == "cdf_centered" || key == "two_sided_cdf_centered" || key == "two_sided") {
        return RandomSetKind::cdf_centered;
    }
    if (key == "one_sided_lower" || key == "lower") {
        return RandomSetKind::one_sided_lower;
    }
    if (key == "one_sided_upper" || key == "upper") {
        return RandomSetKind::one_sided_upper;
    }
    if (key == "density_contour" || key == "contour") {
        return RandomSetKind::density_contour;
    }
    throw DomainError("unknown random set kind '" + name + "'");
}

// ---------------------------------------------------------------------------------------
// RandomSetSpec

RandomSetSpec::RandomSetSpec(RandomSetKind kind, std::shared_ptr<const UnivariateDistribution> reference, double shrink)
    : kind_(kind), reference_(std::move(reference)), shrink_(shrink) {
    if (!reference_) {
        throw DomainError("RandomSetSpec: missing reference distribution");
    }
    if (!(shrink_ > 0.0 && shrink_ <= 1.0)) {
        throw DomainError("RandomSetSpec: shrink must lie in (0, 1]");
    }
}

double RandomSetSpec::contour(double u) const {
    const auto& ref = *reference_;
    if (u < ref.lower() || u > ref.upper()) {
        return 0.0;
    }
    switch (kind_) {
        case RandomSetKind::cdf_centered: {
            const double f = ref.cdf(u);
            return std::clamp(2.0 * std::min(f, 1.0 - f), 0.0, 1.0);
        }
        case RandomSetKind::one_sided_lower: return ref.cdf(u);
        case RandomSetKind::one_sided_upper: return 1.0 - ref.cdf(u);
        case RandomSetKind::density_contour: return ref.contour_plausibility(u);
    }
    return 0.0;
}

double RandomSetSpec::sup_contour(const IntervalSet& set) const {
    const auto& ref = *reference_;
    const IntervalSet clipped = set.intersect(ref.support());
    if (clipped.empty()) {
        return 0.0;
    }
    switch (kind_) {
        case RandomSetKind::cdf_centered: {
            const double median = ref.quantile(0.5);
            double best = 0.0;
            for (const auto& p : clipped.parts()) {
                if (p.contains(median)) {
                    return 1.0;
                }
                best = std::max(best, contour(std::clamp(median, p.lower, p.upper)));
            }
            return best;
        }
        case RandomSetKind::one_sided_lower: return ref.cdf(clipped.hull().upper);
        case RandomSetKind::one_sided_upper: return 1.0 - ref.cdf(clipped.hull().lower);
        case RandomSetKind::density_contour: {
            const double top = ref.sup_log_pdf(clipped);
            return top == -kInf ? 0.0 : ref.probability_density_at_most(top);
        }
    }
    return 0.0;
}

double RandomSetSpec::hit_probability(const IntervalSet& set) const {
    return std::clamp(1.0 - (1.0 - sup_contour(set)) / shrink_, 0.0, 1.0);
}

double RandomSetSpec::containment_probability(double u_star) const { return hit_probability(IntervalSet::point(u_star)); }

IntervalSet RandomSetSpec::level_region(double threshold) const {
    const auto& ref = *reference_;
    if (threshold <= 0.0) {
        return IntervalSet({ref.support()});
    }
    if (threshold >= 1.0) {
        if (kind_ == RandomSetKind::cdf_centered) {
            return IntervalSet::point(ref.quantile(0.5));
        }
        if (kind_ == RandomSetKind::density_contour) {
            return ref.level_set(ref.sup_log_pdf(ref.support()));
        }
        return {};
    }
    switch (kind_) {
        case RandomSetKind::cdf_centered:
            return IntervalSet({{ref.quantile(threshold / 2.0), ref.quantile(1.0 - threshold / 2.0)}});
        case RandomSetKind::one_sided_lower: return IntervalSet({{ref.quantile(threshold), ref.upper()}});
        case RandomSetKind::one_sided_upper: return IntervalSet({{ref.lower(), ref.quantile(1.0 - threshold)}});
        case RandomSetKind::density_contour: {
            // Level L with P(f(U) <= e^L) = threshold.
            const double top = ref.sup_log_pdf(ref.support());
            double lo = top - 1.0;
            while (ref.probability_density_at_most(lo) > threshold) {
                lo = top - 2.0 * (top - lo);
                if (top - lo > 1e4) {
                    break;
                }
            }
            const double level = invert_monotone(
                [&](double l) { return ref.probability_density_at_most(l); }, threshold, lo, top, 1e-12);
            return ref.level_set(level);
        }
    }
    return {};
}

IntervalSet RandomSetSpec::realize(double u_draw) const {
    const double threshold = 1.0 - shrink_ * (1.0 - contour(u_draw));
    if (shrink_ == 1.0) {
        // Exact boundaries through the draw itself.
        const auto& ref = *reference_;
        switch (kind_) {
            case RandomSetKind::one_sided_lower: return IntervalSet({{u_draw, ref.upper()}});
            case RandomSetKind::one_sided_upper: return IntervalSet({{ref.lower(), u_draw}});
            case RandomSetKind::density_contour: return ref.level_set(ref.log_pdf(u_draw));
            case RandomSetKind::cdf_centered: break;
        }
    }
    return level_region(threshold);
}

// ---------------------------------------------------------------------------------------
// MonotoneMap

MonotoneMap::MonotoneMap(ParameterKind target, std::function<double(double)> forward,
                         std::function<double(double)> inverse, bool increasing, Interval u_domain,
                         Interval theta_domain)
    : target_(target),
      forward_(std::move(forward)),
      inverse_(std::move(inverse)),
      increasing_(increasing),
      u_domain_(u_domain),
      theta_domain_(theta_domain) {}

MonotoneMap MonotoneMap::location(double x, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(x)) {
        throw DomainError("MonotoneMap::location: need finite x and sigma > 0");
    }
    return MonotoneMap(
        ParameterKind::location, [x, sigma](double u) { return x - sigma * u; },
        [x, sigma](double mu) { return (x - mu) / sigma; }, false, {-kInf, kInf}, {-kInf, kInf});
}

MonotoneMap MonotoneMap::reciprocal_scale(double d) {
    if (!(d > 0.0) || !std::isfinite(d)) {
        throw DomainError("MonotoneMap::reciprocal_scale: need finite d > 0");
    }
    return MonotoneMap(
        ParameterKind::scale, [d](double s) { return s == 0.0 ? kInf : d / s; },
        [d](double sigma) { return sigma == 0.0 ? kInf : d / sigma; }, false, {0.0, kInf}, {0.0, kInf});
}

MonotoneMap MonotoneMap::location_ratio(double x1, double d) {
    if (!(d > 0.0) || !std::isfinite(d) || !std::isfinite(x1)) {
        throw DomainError("MonotoneMap::location_ratio: need finite x1 and d > 0");
    }
    return location(x1, d);
}

IntervalSet MonotoneMap::preimage(const IntervalSet& theta_set) const {
    std::vector<Interval> parts;
    const IntervalSet clipped = theta_set.intersect(theta_domain_);
    for (const auto& p : clipped.parts()) {
        double a = inverse_(p.lower), b = inverse_(p.upper);
        if (!increasing_) {
            std::swap(a, b);
        }
        a = std::max(a, u_domain_.lower);
        b = std::min(b, u_domain_.upper);
        if (a <= b) {
            parts.push_back({a, b});
        }
    }
    return IntervalSet(std::move(parts));
}

IntervalSet MonotoneMap::image(const IntervalSet& u_set) const {
    std::vector<Interval> parts;
    const IntervalSet clipped = u_set.intersect(u_domain_);
    for (const auto& p : clipped.parts()) {
        double a = forward_(p.lower), b = forward_(p.upper);
        if (!increasing_) {
            std::swap(a, b);
        }
        parts.push_back({a, b});
    }
    return IntervalSet(std::move(parts));
}

// ---------------------------------------------------------------------------------------
// Assertion

Assertion::Assertion(ParameterKind parameter, IntervalSet set, bool negated)
    : parameter_(parameter), set_(std::move(set)), negated_(negated) {}

IntervalSet Assertion::closure() const { return negated_ ? set_.complement(space()) : set_.intersect(space()); }

bool Assertion::contains(double theta) const {
    const Interval sp = space();
    return sp.contains(theta) && (set_.contains(theta) != negated_);
}

Interval Assertion::space() const {
    return parameter_ == ParameterKind::location ? Interval{-kInf, kInf} : Interval{0.0, kInf};
}

Assertion Assertion::singleton(double value, ParameterKind p) {
    if (!std::isfinite(value)) {
        throw DomainError("Assertion::singleton: value must be finite");
    }
    return {p, IntervalSet::point(value)};
}
Assertion Assertion::at_most(double value, ParameterKind p) { return {p, IntervalSet({{-kInf, value}})}; }
Assertion Assertion::at_least(double value, ParameterKind p) { return {p, IntervalSet({{value, kInf}})}; }
Assertion Assertion::interval(double lower, double upper, ParameterKind p) {
    if (!(lower <= upper)) {
        throw DomainError("Assertion::interval: lower > upper");
    }
    return {p, IntervalSet({{lower, upper}})};
}
Assertion Assertion::everything(ParameterKind p) { return {p, IntervalSet::all()}; }

Assertion Assertion::complement() const { return {parameter_, set_, !negated_}; }

// ---------------------------------------------------------------------------------------
// Belief and plausibility

BeliefPlausibility belief_and_plausibility(const MonotoneMap& map, const Assertion& assertion,
                                           const RandomSetSpec& random_set) {
    if (map.target() != assertion.parameter()) {
        throw CapabilityError("assertion and association refer to different parameters");
    }
    // Contours are continuous, so the sup over an open set equals the sup over its closure.
    const double pl = random_set.hit_probability(map.preimage(assertion.closure()));
    const double pl_complement = random_set.hit_probability(map.preimage(assertion.complement().closure()));
    return {std::clamp(1.0 - pl_complement, 0.0, pl), pl};
}

BeliefPlausibility belief_and_plausibility_mc(const MonotoneMap& map, const Assertion& assertion,
                                              const RandomSetSpec& random_set, std::size_t draws,
                                              std::uint64_t seed) {
    if (map.target() != assertion.parameter()) {
        throw CapabilityError("assertion and association refer to different parameters");
    }
    if (draws == 0) {
        throw DomainError("belief_and_plausibility_mc: draws must be positive");
    }
    StreamRng rng(seed, 0);
    std::size_t hits = 0, inside = 0;
    for (std::size_t i = 0; i < draws; ++i) {
        const IntervalSet s = random_set.realize(random_set.reference().sample(rng));
        const IntervalSet theta = map.image(s);
        // For a negated assertion: S hits A iff S is not inside the stored set, and S lies
        // in A iff it misses the stored set.
        const bool meets = theta.intersects(assertion.set());
        const bool within = !theta.empty() && theta.subset_of(assertion.set());
        if (assertion.negated() ? !within : meets) {
            ++hits;
        }
        if (!theta.empty() && (assertion.negated() ? !meets : within)) {
            ++inside;
        }
    }
    return {static_cast<double>(inside) / static_cast<double>(draws),
            static_cast<double>(hits) / static_cast<double>(draws)};
}

double basic_plausibility(double x, double mu0, double sigma_known) {
    if (!(sigma_known > 0.0)) {
        throw DomainError("basic_plausibility: sigma must be positive");
    }
    return 2.0 * cdf(-std::abs(x - mu0) / sigma_known, CauchyParams::standard());
}

// ---------------------------------------------------------------------------------------
// Curves and intervals

PlausibilityCurve tabulate(const PlausibilityFunction& pl, const std::vector<double>& grid) {
    if (grid.empty()) {
        throw DomainError("tabulate: empty grid");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw DomainError("tabulate: grid must be strictly increasing");
        }
    }
    PlausibilityCurve c{grid, {}};
    c.values.reserve(grid.size());
    for (double g : grid) {
        c.values.push_back(pl(g));
    }
    return c;
}

namespace {

void check_curve(const PlausibilityCurve& curve, double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw DomainError("plausibility interval: level must lie in (0, 1)");
    }
    if (curve.grid.empty() || curve.grid.size() != curve.values.size()) {
        throw DomainError("plausibility interval: malformed curve");
    }
}

// Curve with the refined peak of pl inserted.
PlausibilityCurve with_peak(const PlausibilityCurve& curve, const PlausibilityFunction& pl) {
    const auto& v = curve.values;
    const std::size_t i = static_cast<std::size_t>(std::distance(v.begin(), std::max_element(v.begin(), v.end())));
    const double a = curve.grid[i == 0 ? 0 : i - 1];
    const double b = curve.grid[i + 1 == v.size() ? i : i + 1];
    PlausibilityCurve out = curve;
    if (a < b) {
        const Maximum m = maximize_bracketed(pl, a, b, 1e-12 * (1.0 + std::abs(curve.grid[i])));
        if (m.value > v[i]) {
            auto it = std::lower_bound(out.grid.begin(), out.grid.end(), m.x);
            const auto k = std::distance(out.grid.begin(), it);
            if (it == out.grid.end() || *it != m.x) {
                out.grid.insert(it, m.x);
                out.values.insert(out.values.begin() + k, m.value);
            }
        }
    }
    return out;
}

// Follows pl outward from `start` in direction dir until it drops to the threshold;
// returns the crossing or +-inf.
double outward_crossing(const PlausibilityFunction& pl, double threshold, double start, double span, int dir,
                        double limit) {
    double step = std::max(span, 1.0);
    double inner = start;
    while (true) {
        const double outer = start + dir * step;
        if (std::abs(outer) > limit) {
            return dir * kInf;
        }
        if (pl(outer) <= threshold) {
            return invert_monotone(pl, threshold, std::min(inner, outer), std::max(inner, outer),
                                   1e-10 * (1.0 + std::abs(outer)));
        }
        inner = outer;
        step *= 2.0;
    }
}

double solve_crossing(const PlausibilityFunction& pl, double threshold, double a, double b) {
    return invert_monotone(pl, threshold, a, b, 1e-11 * (1.0 + std::abs(a) + std::abs(b)));
}

}  // namespace

Interval plausibility_interval(const PlausibilityCurve& curve_in, const PlausibilityFunction& pl, double level,
                               double search_limit) {
    check_curve(curve_in, level);
    const double threshold = 1.0 - level;
    const PlausibilityCurve curve = with_peak(curve_in, pl);
    const auto& g = curve.grid;
    const auto& v = curve.values;
    const std::size_t peak =
        static_cast<std::size_t>(std::distance(v.begin(), std::max_element(v.begin(), v.end())));
    if (!(v[peak] > threshold)) {
        throw DomainError("plausibility interval is empty: the curve never exceeds 1 - level");
    }
    const double span = g.back() - g.front();
    double lower, upper;
    std::size_t j = peak;
    while (j > 0 && v[j - 1] > threshold) {
        --j;
    }
    lower = j == 0 ? outward_crossing(pl, threshold, g.front(), span, -1, search_limit)
                   : solve_crossing(pl, threshold, g[j - 1], g[j]);
    j = peak;
    while (j + 1 < g.size() && v[j + 1] > threshold) {
        ++j;
    }
    upper = j + 1 == g.size() ? outward_crossing(pl, threshold, g.back(), span, 1, search_limit)
                              : solve_crossing(pl, threshold, g[j], g[j + 1]);
    return {lower, upper};
}

Interval plausibility_interval(const PlausibilityCurve& curve, double level) {
    check_curve(curve, level);
    const double threshold = 1.0 - level;
    const auto& g = curve.grid;
    const auto& v = curve.values;
    const std::size_t peak =
        static_cast<std::size_t>(std::distance(v.begin(), std::max_element(v.begin(), v.end())));
    if (!(v[peak] > threshold)) {
        throw DomainError("plausibility interval is empty: the curve never exceeds 1 - level");
    }
    auto interpolate = [&](std::size_t a, std::size_t b) {
        const double t = (threshold - v[a]) / (v[b] - v[a]);
        return g[a] + t * (g[b] - g[a]);
    };
    std::size_t j = peak;
    while (j > 0 && v[j - 1] > threshold) {
        --j;
    }
    const double lower = j == 0 ? -kInf : interpolate(j - 1, j);
    j = peak;
    while (j + 1 < g.size() && v[j + 1] > threshold) {
        ++j;
    }
    const double upper = j + 1 == g.size() ? kInf : interpolate(j, j + 1);
    return {lower, upper};
}

IntervalSet plausibility_region(const PlausibilityCurve& curve_in, const PlausibilityFunction& pl, double level) {
    check_curve(curve_in, level);
    const double threshold = 1.0 - level;
    const PlausibilityCurve curve = with_peak(curve_in, pl);
    const auto& g = curve.grid;
    const auto& v = curve.values;
    const double span = g.back() - g.front();
    std::vector<Interval> parts;
    bool inside = v[0] > threshold;
    double start = inside ? outward_crossing(pl, threshold, g.front(), span, -1, 1e12) : 0.0;
    for (std::size_t i = 1; i < g.size(); ++i) {
        const bool now = v[i] > threshold;
        if (now != inside) {
            const double x = solve_crossing(pl, threshold, g[i - 1], g[i]);
            if (now) {
                start = x;
            } else {
                parts.push_back({start, x});
            }
            inside = now;
        }
    }
    if (inside) {
        parts.push_back({start, outward_crossing(pl, threshold, g.back(), span, 1, 1e12)});
    }
    return IntervalSet(std::move(parts));
}

// ---------------------------------------------------------------------------------------
// Validity

ValidityResult validity_check(const RandomSetSpec& random_set, const UnivariateDistribution& aux, std::size_t n_sim,
                              std::uint64_t seed, unsigned threads) {
    if (n_sim == 0) {
        throw DomainError("validity_check: n_sim must be positive");
    }
    ValidityResult r;
    r.containment = parallel_map<double>(n_sim, threads, [&](std::size_t i) {
        StreamRng rng(seed, i);
        return random_set.containment_probability(aux.sample(rng));
    });
    r.stats = uniformity_stats(r.containment);
    r.dominance_pass = r.stats.dominance_p > 0.01;
    return r;
}

}  // namespace cauchy_im
