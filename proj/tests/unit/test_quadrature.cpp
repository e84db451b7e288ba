#include "cauchy_im/errors.hpp"
#include "cauchy_im/quadrature.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace cauchy_im;

TEST_CASE("real-line integrals") {
    const double pi = std::numbers::pi;
    CHECK(integrate_real_line([&](double u) { return 1.0 / (pi * (1 + u * u)); }).value ==
          doctest::Approx(1.0).epsilon(1e-12));
    const auto odd = integrate_real_line([&](double u) { return u / (pi * (1 + u * u) * (1 + u * u)); });
    CHECK(std::abs(odd.value) < 1e-12);

    auto f = [](double u) { return 1.0 / ((1 + u * u) * (1 + (u - 1) * (u - 1))); };
    const double brute = oracle::trapezoid(f, -1e6, 1e6, 10000000);
    const auto r = integrate_real_line(f);
    CHECK(std::abs(r.value - brute) <= 1e-8 * brute);
    CHECK(r.value == doctest::Approx(2.0 * pi / 5.0).epsilon(1e-12));  // residue theorem
}

TEST_CASE("half-line integrals") {
    CHECK(integrate_half_line([](double s) { return std::exp(-s); }).value == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(integrate_half_line([](double s) { return s / ((1 + s * s) * (1 + s * s)); }).value ==
          doctest::Approx(0.5).epsilon(1e-12));
    auto f = [](double s) { return s * s / ((1 + s * s) * (1 + 4 * s * s)); };
    const double brute = oracle::half_line(f);
    const auto r = integrate_half_line(f);
    CHECK(std::abs(r.value - brute) <= 1e-8 * brute);
    // integrable singularity at zero
    CHECK(integrate_half_line([](double s) { return std::pow(s, -0.5) / ((1 + s) * (1 + s)); }).value ==
          doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-8));
}

TEST_CASE("error bound covers the true error") {
    const double pi = std::numbers::pi;
    struct Case {
        RealFunction f;
        double exact;
    };
    const std::vector<Case> cases = {
        {[&](double u) { return 1.0 / (1 + u * u); }, pi},
        {[](double u) { return 1.0 / ((1 + u * u) * (1 + (u - 1) * (u - 1))); }, 2.0 * pi / 5.0},
        {[](double u) { return std::exp(-u * u); }, std::sqrt(pi)},
        {[](double u) { return 1.0 / (1 + std::pow(u - 30.0, 4)); }, pi / std::sqrt(2.0)},
    };
    for (const auto& c : cases) {
        for (double tol : {1e-4, 1e-7, 1e-10}) {
            QuadratureOptions o;
            o.rel_tol = tol;
            const auto r = integrate_real_line(c.f, o);
            CHECK(std::abs(r.value - c.exact) <= r.error + 1e-15);
        }
    }
}

TEST_CASE("doubling the refinement budget stays within the error bound") {
    auto f = [](double u) { return 1.0 / ((1 + 100 * u * u) * (1 + (u - 3) * (u - 3))); };
    QuadratureOptions a, b;
    a.rel_tol = b.rel_tol = 1e-9;
    b.max_subdivisions = 2 * a.max_subdivisions;
    const auto ra = integrate_real_line(f, a);
    const auto rb = integrate_real_line(f, b);
    CHECK(std::abs(ra.value - rb.value) <= ra.error + rb.error);
}

TEST_CASE("non-convergence raises an accuracy error") {
    QuadratureOptions o;
    o.max_subdivisions = 3;
    o.rel_tol = 1e-14;
    CHECK_THROWS_AS(integrate_real_line([](double u) { return 1.0 / std::sqrt(std::abs(u) + 1e-300) / (1 + u * u); }, o),
                    AccuracyError);
}

TEST_CASE("log integration survives extreme scales") {
    // log of exp(-1000) * pi
    const double v = log_integrate_real_line([](double u) { return -1000.0 - std::log1p(u * u); });
    CHECK(v == doctest::Approx(-1000.0 + std::log(std::numbers::pi)).epsilon(1e-13));
    const double w = log_integrate_real_line([](double u) { return 1000.0 - std::log1p(u * u); });
    CHECK(w == doctest::Approx(1000.0 + std::log(std::numbers::pi)).epsilon(1e-13));
}

TEST_CASE("invert_monotone") {
    CHECK(invert_monotone([](double x) { return 0.5 + std::atan(x) / std::numbers::pi; }, 0.75, 0.0, 10.0) ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK(invert_monotone([](double x) { return x * x * x; }, 8.0, 0.0, 3.0) == doctest::Approx(2.0).epsilon(1e-10));
    // the Example-1 flank 2F(-|mu|) at X = 0
    auto flank = [](double mu) { return 2.0 * oracle::std_cauchy_cdf(-std::abs(mu)); };
    CHECK(std::abs(invert_monotone(flank, 0.5, 0.0, 100.0) - 1.0) <= 1e-8);
    CHECK_THROWS_AS(invert_monotone([](double x) { return x; }, 5.0, 0.0, 1.0), DomainError);
}

TEST_CASE("maximize_bracketed") {
    const auto m = maximize_bracketed([](double x) { return -(x - 0.3) * (x - 0.3); }, -1.0, 2.0);
    CHECK(m.x == doctest::Approx(0.3).epsilon(1e-8));
    const auto edge = maximize_bracketed([](double x) { return x; }, -1.0, 2.0);
    CHECK(edge.x == 2.0);
}

TEST_CASE("GridDensity from a standard Cauchy log-kernel") {
    const auto g = normalize([](double u) { return -std::log1p(u * u); }, Domain::real_line);
    CHECK(g.log_norm() == doctest::Approx(std::log(std::numbers::pi)).epsilon(1e-12));
    CHECK(g.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g.cdf(INFINITY) == 1.0);
    for (double x = -1e4; x <= 1e4; x += 97.3) {
        CHECK(std::abs(g.cdf(x) - oracle::std_cauchy_cdf(x)) <= 1e-9);
    }
    for (int i = 1; i < 100; ++i) {
        const double p = i / 100.0;
        const double x = g.quantile(p);
        CHECK(std::abs(g.cdf(x) - p) <= 1e-9);
        CHECK(std::abs(x - std::tan(std::numbers::pi * (p - 0.5))) <= 1e-6);
    }
    CHECK(std::abs(g.mode()) < 1e-7);
    CHECK_THROWS_AS(g.quantile(1.0), DomainError);
}

TEST_CASE("GridDensity cdf is monotone and nodes are increasing") {
    const auto g = normalize(
        [](double u) { return -std::log1p(u * u) - std::log1p((u - 8) * (u - 8)) - std::log1p((u + 3) * (u + 3)); },
        Domain::real_line, {.center = 0.0, .scale = 1.0, .breakpoints = {-3.0, 0.0, 8.0}});
    const auto nodes = g.nodes();
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        CHECK(nodes[i] > nodes[i - 1]);
    }
    double prev = 0.0;
    for (double x : nodes) {
        const double c = g.cdf(x);
        CHECK(c >= prev);
        CHECK(c <= 1.0);
        prev = c;
    }
    CHECK(prev == 1.0);
    // normalized integral by an independent route
    const double total = oracle::trapezoid([&](double u) { return g.pdf(u); }, -1e5, 1e5, 4000000);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("GridDensity level sets on a bimodal density") {
    auto kernel = [](double u) { return -std::log1p(u * u) - std::log1p((u - 10) * (u - 10)) + std::log(1 + 0.01 * u * u); };
    const auto g = normalize(kernel, Domain::real_line, {.breakpoints = {0.0, 10.0}});
    const double level = g.log_pdf(5.0);
    const auto set = g.level_set(level);
    // bimodal with a dip at 5: the set at f(5) is an interval containing 5 whose ends have f = f(5)
    for (const auto& p : set.parts()) {
        if (std::isfinite(p.lower)) {
            CHECK(g.log_pdf(p.lower) == doctest::Approx(level).epsilon(1e-8));
        }
        if (std::isfinite(p.upper)) {
            CHECK(g.log_pdf(p.upper) == doctest::Approx(level).epsilon(1e-8));
        }
    }
    const double higher = std::max(g.log_pdf(0.0), g.log_pdf(10.0)) - 0.01;
    CHECK(g.level_set(higher).parts().size() >= 1);
    // contour plausibility against a brute-force oracle
    for (double x0 : {-2.0, 1.0, 5.0, 12.0, 40.0}) {
        const double brute = oracle::density_at_most(kernel, kernel(x0), -100.0, 100.0, 1e-3);
        CHECK(std::abs(g.contour_plausibility(x0) - brute) < 1e-8);
    }
}

TEST_CASE("GridDensity on the half line") {
    // Exponential(1)
    const auto g = normalize([](double s) { return -s; }, Domain::positive_half_line);
    CHECK(g.log_norm() == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(g.cdf(1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-10));
    CHECK(g.quantile(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK(g.cdf(-1.0) == 0.0);
    CHECK(g.mean() == doctest::Approx(1.0).epsilon(1e-8));
    // monotone density: every level set starts at 0
    const auto set = g.level_set(-2.0);
    REQUIRE(set.parts().size() == 1);
    CHECK(set.parts()[0].lower == 0.0);
    CHECK(set.parts()[0].upper == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("non-integrable input is rejected") {
    CHECK_THROWS_AS(normalize([](double u) { return -0.5 * std::log1p(u * u); }, Domain::real_line), AccuracyError);
}

TEST_CASE("GridDensity2D on a product of two Cauchy kernels") {
    // f(t, s) ∝ 1/(1+t^2) * 1/(1+s^2) on R x R+: P(T<=0, S<=1) = 1/2 * 1/2
    GridDensity2D d([](double t, double s) { return -std::log1p(t * t) - std::log1p(s * s); },
                    [](double) { return std::vector<double>{0.0}; }, {});
    CHECK(d.log_norm() == doctest::Approx(std::log(std::numbers::pi * std::numbers::pi / 2.0)).epsilon(1e-10));
    CHECK(d.rectangle_probability(-INFINITY, 0.0, 0.0, 1.0) == doctest::Approx(0.25).epsilon(1e-8));
    CHECK(d.rectangle_probability(-1.0, 1.0, 1.0, INFINITY) == doctest::Approx(0.25).epsilon(1e-8));
    const auto [tm, sm] = d.mode();
    CHECK(std::abs(tm) < 1e-6);
    CHECK(sm < 1e-5);
    // contour: f <= f(t0, s0) has mass 1 - mass{(1+t^2)(1+s^2) < k}; brute-force over a grid
    const double t0 = 1.0, s0 = 0.5;
    const double k = (1 + t0 * t0) * (1 + s0 * s0);
    const double inside = oracle::trapezoid(
        [&](double s) {
            const double r2 = k / (1 + s * s) - 1.0;
            if (r2 <= 0) {
                return 0.0;
            }
            return 2.0 * std::atan(std::sqrt(r2)) / (1 + s * s);
        },
        0.0, std::sqrt(k - 1.0), 200000);
    CHECK(d.contour_plausibility(t0, s0) == doctest::Approx(1.0 - inside / (std::numbers::pi * std::numbers::pi / 2.0)).epsilon(1e-6));
}
