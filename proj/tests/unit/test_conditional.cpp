#include "cauchy_im/conditional.hpp"
#include "cauchy_im/errors.hpp"
#include "cauchy_im/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace cauchy_im;

namespace {

// Unnormalized flat-prior posterior of mu.
auto flat_log_post(std::vector<double> x, double sigma) {
    return [x, sigma](double mu) {
        double s = 0.0;
        for (double v : x) {
            const double r = (v - mu) / sigma;
            s -= std::log1p(r * r);
        }
        return s;
    };
}

double oracle_posterior_cdf(const std::vector<double>& x, double sigma, double mu0) {
    const auto lf = flat_log_post(x, sigma);
    return oracle::tan_trapezoid(lf, -INFINITY, mu0) / oracle::tan_trapezoid(lf, -INFINITY, INFINITY);
}

double oracle_posterior_quantile(const std::vector<double>& x, double sigma, double p) {
    double lo = -100.0, hi = 100.0;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (oracle_posterior_cdf(x, sigma, mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> seeded_data(std::uint64_t seed, std::size_t n) {
    StreamRng rng(seed, 7);
    std::vector<double> x(n);
    for (auto& v : x) {
        v = std::tan(std::numbers::pi * (rng.uniform() - 0.5));
    }
    return x;
}

}  // namespace

TEST_CASE("weight vector validation") {
    CHECK_NOTHROW(WeightVector({0.5, 0.5}));
    CHECK_NOTHROW(WeightVector({2.0, -1.0}));
    CHECK_THROWS_AS(WeightVector({0.5, 0.4}), DomainError);
    CHECK_THROWS_AS(WeightVector({0.0, 1.0}), DomainError);
    CHECK_THROWS_AS(WeightVector({}), DomainError);
    CHECK(WeightVector::equal(4).combine(std::vector<double>{1, 2, 3, 6}) == doctest::Approx(3.0));
    CHECK_THROWS_AS(WeightVector::equal(3).combine(std::vector<double>{1, 2}), DomainError);
}

TEST_CASE("conditional density of U1") {
    SUBCASE("n = 1 is the standard Cauchy") {
        const auto g = conditional_density_u1(std::vector<double>{3.7}, 2.0);
        for (double u = -30; u <= 30; u += 0.7) {
            CHECK(g.pdf(u) == doctest::Approx(1.0 / (std::numbers::pi * (1 + u * u))).epsilon(1e-10));
            CHECK(g.cdf(u) == doctest::Approx(oracle::std_cauchy_cdf(u)).epsilon(1e-10));
        }
    }
    SUBCASE("symmetric pair") {
        const std::vector<double> x{-1.0, 1.0};
        const auto g = conditional_density_u1(x, 1.0);
        // P(mu <= 0) = P(U1 >= x1)
        CHECK(1.0 - g.cdf(-1.0) == doctest::Approx(0.5).epsilon(1e-12));
        for (double m = 0.1; m < 10; m += 0.3) {
            CHECK(g.pdf(-1.0 - m) == doctest::Approx(g.pdf(-1.0 + m)).epsilon(1e-12));
        }
    }
    SUBCASE("induced mu density is the flat-prior posterior") {
        const std::vector<double> x{0.0, 1.0, 5.0};
        const auto g = conditional_density_u1(x, 1.0);
        const auto lf = flat_log_post(x, 1.0);
        const double z = oracle::tan_trapezoid(lf, -INFINITY, INFINITY);
        for (double mu = -8; mu <= 12; mu += 0.05) {
            CHECK(std::abs(g.pdf(x[0] - mu) - std::exp(lf(mu)) / z) <= 1e-8);
        }
    }
    CHECK_THROWS_AS(conditional_density_u1(std::vector<double>{}, 1.0), DomainError);
    CHECK_THROWS_AS(conditional_density_u1(std::vector<double>{1.0}, 0.0), DomainError);
}

TEST_CASE("T density with a = e1 is the U1 density") {
    const std::vector<double> x{0.3, -2.1, 4.4, 0.9};
    const auto g1 = conditional_density_u1(x, 1.3);
    const auto gt = conditional_density_t(x, 1.3, WeightVector::first(x.size()));
    for (double u = -10; u <= 10; u += 0.25) {
        CHECK(gt.pdf(u) == doctest::Approx(g1.pdf(u)).epsilon(1e-12));
    }
}

TEST_CASE("weight invariance of one-sided and interval plausibilities") {
    const std::vector<double> x{0.3, -2.1, 4.4};
    const std::vector<WeightVector> weights{WeightVector::first(3), WeightVector::equal(3),
                                            WeightVector({0.2, 0.5, 0.3}), WeightVector({1.5, -0.25, -0.25}),
                                            WeightVector({-0.5, 1.0, 0.5})};
    for (const auto kind : {RandomSetKind::one_sided_upper, RandomSetKind::one_sided_lower}) {
        for (double mu0 : {-1.0, 0.0, 1.0}) {
            const auto ref = ConditionalIM(x, 1.0, weights[0]).evaluate(Assertion::at_most(mu0), kind);
            for (const auto& w : weights) {
                const auto bp = ConditionalIM(x, 1.0, w).evaluate(Assertion::at_most(mu0), kind);
                CHECK(std::abs(bp.plausibility - ref.plausibility) <= 1e-7);
                CHECK(std::abs(bp.belief - ref.belief) <= 1e-7);
            }
        }
    }
    const auto ref = ConditionalIM(x, 1.0, weights[0]).evaluate(Assertion::interval(-0.5, 1.5),
                                                                 RandomSetKind::cdf_centered);
    for (const auto& w : weights) {
        const auto bp = ConditionalIM(x, 1.0, w).evaluate(Assertion::interval(-0.5, 1.5), RandomSetKind::cdf_centered);
        CHECK(std::abs(bp.plausibility - ref.plausibility) <= 1e-7);
        CHECK(std::abs(bp.belief - ref.belief) <= 1e-7);
    }
}

TEST_CASE("one-sided plausibility equals the flat-prior posterior cdf") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto x = seeded_data(seed, 3 + 2 * seed);
        const double sigma = 0.5 * static_cast<double>(seed);
        const ConditionalIM im(x, sigma, WeightVector::equal(x.size()));
        for (double mu0 = -6; mu0 <= 6; mu0 += 0.75) {
            const double pl = im.evaluate(Assertion::at_most(mu0), RandomSetKind::one_sided_upper).plausibility;
            CHECK(std::abs(pl - oracle_posterior_cdf(x, sigma, mu0)) <= 1e-7);
        }
    }
}

TEST_CASE("conditional IM examples") {
    const std::vector<double> sym{-1.0, 1.0};
    CHECK(cim_plausibility_mu(sym, 1.0, Assertion::at_most(0.0), RandomSetKind::one_sided_upper).plausibility ==
          doctest::Approx(0.5).epsilon(1e-10));
    for (const auto kind : {RandomSetKind::cdf_centered, RandomSetKind::density_contour}) {
        CHECK(cim_plausibility_mu(sym, 1.0, Assertion::singleton(0.3), kind).belief == 0.0);
    }
    CHECK(cim_plausibility_mu(sym, 1.0, Assertion::at_most(0.0), RandomSetKind::one_sided_upper).belief == 0.0);
}

TEST_CASE("contour plausibility matches a rejection-sampling Monte Carlo") {
    const std::vector<double> x{0.0, 1.0, 5.0};
    const double pl = cim_plausibility_mu(x, 1.0, Assertion::singleton(1.0), RandomSetKind::density_contour).plausibility;
    // U1 | W by rejection from the standard Cauchy; the remaining factors are bounded by 1.
    const std::vector<double> w{1.0, 5.0};
    auto log_f = [&](double u) {
        double s = -std::log1p(u * u);
        for (double wi : w) {
            s -= std::log1p((u + wi) * (u + wi));
        }
        return s;
    };
    const double level = log_f(x[0] - 1.0);
    StreamRng rng(2024, 0);
    const long draws = 1000000;
    long accepted = 0, below = 0;
    while (accepted < draws) {
        const double u = std::tan(std::numbers::pi * (rng.uniform() - 0.5));
        double accept = 1.0;
        for (double wi : w) {
            accept /= 1.0 + (u + wi) * (u + wi);
        }
        if (rng.uniform() < accept) {
            ++accepted;
            below += log_f(u) <= level;
        }
    }
    const double p_hat = static_cast<double>(below) / draws;
    const double se = std::sqrt(p_hat * (1 - p_hat) / draws);
    CHECK(std::abs(pl - p_hat) <= 3 * se);
}

TEST_CASE("conditional IM curves") {
    SUBCASE("n = 1 reduces to the basic IM") {
        std::vector<double> grid;
        for (double mu = -20; mu <= 20; mu += 0.1) {
            grid.push_back(mu);
        }
        const auto c = cim_curve(std::vector<double>{0.4}, 1.5, grid, RandomSetKind::cdf_centered);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(std::abs(c.values[i] - basic_plausibility(0.4, grid[i], 1.5)) <= 1e-8);
        }
    }
    SUBCASE("range and tails") {
        const std::vector<double> x{0.0, 1.0, 5.0};
        const auto c = cim_curve(x, 1.0, {-1e6, -100, -3, 0, 0.8, 2, 7, 100, 1e6}, RandomSetKind::density_contour);
        for (double v : c.values) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        CHECK(c.values.front() < 1e-10);
        CHECK(c.values.back() < 1e-10);
    }
    SUBCASE("translation equivariance") {
        const auto x = seeded_data(11, 5);
        const double c = 3.25;
        std::vector<double> shifted = x;
        for (auto& v : shifted) {
            v += c;
        }
        std::vector<double> grid, grid_shifted;
        for (double mu = -8; mu <= 8; mu += 0.25) {
            grid.push_back(mu);
            grid_shifted.push_back(mu + c);
        }
        for (const auto kind : {RandomSetKind::cdf_centered, RandomSetKind::density_contour}) {
            const auto a = cim_curve(x, 1.0, grid, kind);
            const auto b = cim_curve(shifted, 1.0, grid_shifted, kind);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                CHECK(std::abs(a.values[i] - b.values[i]) <= 1e-9);
            }
        }
    }
    SUBCASE("permutation invariance") {
        const std::vector<double> x{0.0, 1.0, 5.0}, y{5.0, 0.0, 1.0};
        for (double mu = -4; mu <= 8; mu += 0.5) {
            CHECK(std::abs(ConditionalIM(x, 1.0).plausibility(mu, RandomSetKind::density_contour) -
                           ConditionalIM(y, 1.0).plausibility(mu, RandomSetKind::density_contour)) <= 1e-8);
        }
    }
}

TEST_CASE("centered 95% interval matches equal-tailed Bayes interval") {
    const std::vector<double> x{0.0, 1.0, 5.0};
    const Interval iv = ConditionalIM(x, 1.0).interval(0.95, RandomSetKind::cdf_centered);
    CHECK(std::abs(iv.lower - oracle_posterior_quantile(x, 1.0, 0.025)) <= 1e-4);
    CHECK(std::abs(iv.upper - oracle_posterior_quantile(x, 1.0, 0.975)) <= 1e-4);
}

TEST_CASE("conditional IM is valid at the truth") {
    // 2000 replicates here; the acceptance suite runs the full 10^4.
    const int reps = 2000;
    std::vector<double> pl(reps);
    for (int r = 0; r < reps; ++r) {
        StreamRng rng(99, static_cast<std::uint64_t>(r));
        std::vector<double> x(3);
        for (auto& v : x) {
            v = std::tan(std::numbers::pi * (rng.uniform() - 0.5));
        }
        pl[r] = ConditionalIM(x, 1.0).plausibility(0.0, RandomSetKind::density_contour);
    }
    CHECK(uniformity_stats(pl).ks_p > 0.01);
}
