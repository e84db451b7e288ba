#include "cauchy_im/conditional.hpp"

#include "cauchy_im/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cauchy_im {

namespace {

void check_data(std::span<const double> data, double sigma) {
    if (data.empty()) {
        throw DomainError("conditional IM: empty data");
    }
    for (double x : data) {
        if (!std::isfinite(x)) {
            throw DomainError("conditional IM: data must be finite");
        }
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw DomainError("conditional IM: sigma must be positive and finite");
    }
}

// Normalized density proportional to prod_k 1/(1 + (t + r_k)^2).
GridDensity shifted_product(std::vector<double> r) {
    std::vector<double> centers(r.size());
    std::transform(r.begin(), r.end(), centers.begin(), [](double v) { return -v; });
    std::vector<double> sorted = centers;
    std::sort(sorted.begin(), sorted.end());
    DensityOptions opts;
    opts.center = sorted[sorted.size() / 2];
    opts.scale = 1.0;
    opts.breakpoints = centers;
    return normalize(
        [r = std::move(r)](double t) {
            double s = 0.0;
            for (double rk : r) {
                const double z = t + rk;
                s -= std::log1p(z * z);
            }
            return s;
        },
        Domain::real_line, opts);
}

}  // namespace

WeightVector::WeightVector(std::vector<double> a) : a_(std::move(a)) {
    if (a_.empty()) {
        throw DomainError("WeightVector: empty");
    }
    double sum = 0.0;
    for (double v : a_) {
        if (!std::isfinite(v)) {
            throw DomainError("WeightVector: weights must be finite");
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw DomainError("WeightVector: weights must sum to 1");
    }
    if (a_[0] == 0.0) {
        throw DomainError("WeightVector: a_1 must be non-zero");
    }
}

WeightVector WeightVector::first(std::size_t n) {
    std::vector<double> a(n, 0.0);
    if (n > 0) {
        a[0] = 1.0;
    }
    return WeightVector(std::move(a));
}

WeightVector WeightVector::equal(std::size_t n) {
    return WeightVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double WeightVector::combine(std::span<const double> x) const {
    if (x.size() != a_.size()) {
        throw DomainError("WeightVector: length does not match the data");
    }
    return std::inner_product(a_.begin(), a_.end(), x.begin(), 0.0);
}

GridDensity conditional_density_u1(std::span<const double> data, double sigma_known) {
    check_data(data, sigma_known);
    std::vector<double> r(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        r[i] = (data[i] - data[0]) / sigma_known;  // r_1 = 0, r_i = w_i
    }
    return shifted_product(std::move(r));
}

GridDensity conditional_density_t(std::span<const double> data, double sigma_known, const WeightVector& weights) {
    check_data(data, sigma_known);
    const double anchor = weights.combine(data);
    std::vector<double> r(data.size());
    for (std::size_t k = 0; k < data.size(); ++k) {
        r[k] = (data[k] - anchor) / sigma_known;
    }
    return shifted_product(std::move(r));
}

ConditionalIM::ConditionalIM(std::vector<double> data, double sigma_known)
    : ConditionalIM(data, sigma_known, WeightVector::first(data.size())) {}

ConditionalIM::ConditionalIM(std::vector<double> data, double sigma_known, const WeightVector& weights)
    : data_(std::move(data)), sigma_(sigma_known) {
    check_data(data_, sigma_);
    anchor_ = weights.combine(data_);
    density_ = std::make_shared<GridDensity>(conditional_density_t(data_, sigma_, weights));
}

MonotoneMap ConditionalIM::map() const { return MonotoneMap::location(anchor_, sigma_); }

RandomSetSpec ConditionalIM::random_set(RandomSetKind kind) const { return RandomSetSpec(kind, density_); }

BeliefPlausibility ConditionalIM::evaluate(const Assertion& assertion, RandomSetKind kind) const {
    return belief_and_plausibility(map(), assertion, random_set(kind));
}

double ConditionalIM::plausibility(double mu0, RandomSetKind kind) const {
    return random_set(kind).containment_probability((anchor_ - mu0) / sigma_);
}

PlausibilityCurve ConditionalIM::curve(const std::vector<double>& grid, RandomSetKind kind) const {
    const RandomSetSpec rs = random_set(kind);
    return tabulate([&](double mu) { return rs.containment_probability((anchor_ - mu) / sigma_); }, grid);
}

Interval ConditionalIM::interval(double level, RandomSetKind kind) const {
    const auto [lo, hi] = std::minmax_element(data_.begin(), data_.end());
    const double pad = 4.0 * sigma_;
    std::vector<double> grid;
    constexpr int kPoints = 200;
    for (int i = 0; i <= kPoints; ++i) {
        grid.push_back(*lo - pad + (*hi - *lo + 2.0 * pad) * i / kPoints);
    }
    const RandomSetSpec rs = random_set(kind);
    auto pl = [&](double mu) { return rs.containment_probability((anchor_ - mu) / sigma_); };
    return plausibility_interval(tabulate(pl, grid), pl, level);
}

BeliefPlausibility cim_plausibility_mu(std::span<const double> data, double sigma_known, const Assertion& assertion,
                                       RandomSetKind kind) {
    return ConditionalIM(std::vector<double>(data.begin(), data.end()), sigma_known).evaluate(assertion, kind);
}

PlausibilityCurve cim_curve(std::span<const double> data, double sigma_known, const std::vector<double>& grid,
                            RandomSetKind kind) {
    return ConditionalIM(std::vector<double>(data.begin(), data.end()), sigma_known).curve(grid, kind);
}

}  // namespace cauchy_im
