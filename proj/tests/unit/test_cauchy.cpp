#include "cauchy_im/cauchy.hpp"
#include "cauchy_im/errors.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace cauchy_im;

TEST_CASE("pdf at the mode and one scale unit away") {
    CHECK(pdf(0.0, CauchyParams::standard()) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-15));
    CHECK(pdf(1.0, CauchyParams::standard()) == doctest::Approx(0.5 / std::numbers::pi).epsilon(1e-15));
    const CauchyParams p(3.5, 2.25);
    CHECK(pdf(3.5, p) == doctest::Approx(1.0 / (std::numbers::pi * 2.25)).epsilon(1e-15));
    CHECK(log_pdf(1e200, CauchyParams::standard()) < -900.0);
    CHECK(std::isfinite(log_pdf(1e200, CauchyParams::standard())));
}

TEST_CASE("params validation") {
    CHECK_THROWS_AS(CauchyParams(0.0, 0.0), DomainError);
    CHECK_THROWS_AS(CauchyParams(0.0, -1.0), DomainError);
    CHECK_THROWS_AS(CauchyParams(NAN, 1.0), DomainError);
    CHECK_THROWS_AS(CauchyParams(0.0, INFINITY), DomainError);
}

TEST_CASE("cdf values and limits") {
    const auto s = CauchyParams::standard();
    CHECK(cdf(0.0, s) == 0.5);
    CHECK(cdf(1.0, s) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(cdf(-1.0, s) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(cdf(-INFINITY, s) == 0.0);
    CHECK(cdf(INFINITY, s) == 1.0);
    // lower tail keeps relative precision
    CHECK(cdf(-1e10, s) == doctest::Approx(1.0 / (std::numbers::pi * 1e10)).epsilon(1e-12));
    CHECK(survival(1e10, s) == doctest::Approx(1.0 / (std::numbers::pi * 1e10)).epsilon(1e-12));
}

TEST_CASE("cdf is location-scale equivariant and monotone") {
    const CauchyParams p(-2.0, 0.7);
    double prev = 0.0;
    for (double x = -50.0; x <= 50.0; x += 0.37) {
        CHECK(cdf(x, p) == cdf((x + 2.0) / 0.7, CauchyParams::standard()));
        CHECK(cdf(x, p) >= prev);
        prev = cdf(x, p);
    }
}

TEST_CASE("quantile examples and round trip") {
    CHECK(quantile(0.5, CauchyParams::standard()) == 0.0);
    CHECK(quantile(0.75, CauchyParams::standard()) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(quantile(0.75, CauchyParams(2.0, 3.0)) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK_THROWS_AS(quantile(0.0, CauchyParams::standard()), DomainError);
    CHECK_THROWS_AS(quantile(1.0, CauchyParams::standard()), DomainError);
    for (double x = -1e6; x <= 1e6; x += 1e6 / 37.0) {
        const double back = quantile(cdf(x, CauchyParams::standard()), CauchyParams::standard());
        CHECK(std::abs(back - x) <= 1e-8 * std::max(1.0, std::abs(x)));
    }
}

TEST_CASE("pdf integrates to one") {
    // u = tan(v) substitution done by hand: the integrand becomes 1/pi on (-pi/2, pi/2).
    const double total = oracle::trapezoid([](double x) { return pdf(x, CauchyParams(1.0, 2.0)); }, -1e6, 1e6, 10000000);
    CHECK(total == doctest::Approx(1.0 - 2.0 * 2.0 / (std::numbers::pi * 1e6)).epsilon(1e-8));
}

TEST_CASE("sampling") {
    SUBCASE("deterministic per seed and stream") {
        const auto a = sample(1000, CauchyParams::standard(), 42, 7);
        const auto b = sample(1000, CauchyParams::standard(), 42, 7);
        const auto c = sample(1000, CauchyParams::standard(), 42, 8);
        CHECK(a == b);
        CHECK(a != c);
    }
    SUBCASE("empirical cdf at 1") {
        const auto xs = sample(1000000, CauchyParams::standard(), 1, 0);
        double count = 0;
        for (double x : xs) {
            count += x <= 1.0;
        }
        CHECK(std::abs(count / 1e6 - 0.75) < 0.002);
    }
    SUBCASE("sample mean is again standard Cauchy") {
        std::vector<double> means;
        for (std::uint64_t r = 0; r < 10000; ++r) {
            const auto xs = sample(10, CauchyParams::standard(), 99, r);
            double s = 0.0;
            for (double x : xs) {
                s += x;
            }
            means.push_back(s / 10.0);
        }
        CHECK(oracle::ks_p(means, oracle::std_cauchy_cdf) > 0.01);
    }
    CHECK_THROWS_AS(sample(0, CauchyParams::standard(), 1), DomainError);
}

TEST_CASE("mobius transform") {
    const CauchyParams p(1.3, 0.4);
    CHECK(mobius_transform(p, MobiusCoeffs::identity()) == p);
    const double r2 = 1.3 * 1.3 + 0.4 * 0.4;
    const auto q = mobius_transform(p, MobiusCoeffs::reciprocal());
    CHECK(q.mu() == doctest::Approx(1.3 / r2).epsilon(1e-15));
    CHECK(q.sigma() == doctest::Approx(0.4 / r2).epsilon(1e-15));
    const auto u = mobius_transform(CauchyParams::standard(), MobiusCoeffs::reciprocal());
    CHECK(u.mu() == doctest::Approx(0.0));
    CHECK(u.sigma() == doctest::Approx(1.0));
    CHECK_THROWS_AS(MobiusCoeffs(1.0, 2.0, 2.0, 4.0), DomainError);
}

TEST_CASE("mobius composition matches the matrix product") {
    const MobiusCoeffs m1(2.0, -1.0, 0.5, 3.0), m2(0.0, 1.0, 1.0, 0.0), m3(-1.0, 4.0, 2.0, 1.0);
    for (const CauchyParams& p : {CauchyParams(0.3, 1.1), CauchyParams(-4.0, 0.2), CauchyParams(10.0, 5.0)}) {
        for (const auto& [outer, inner] : {std::pair{m1, m2}, std::pair{m2, m3}, std::pair{m3, m1}}) {
            const auto stepwise = mobius_transform(mobius_transform(p, inner), outer);
            const auto direct = mobius_transform(p, outer.compose(inner));
            CHECK(stepwise.mu() == doctest::Approx(direct.mu()).epsilon(1e-12));
            CHECK(stepwise.sigma() == doctest::Approx(direct.sigma()).epsilon(1e-12));
        }
        const auto back = mobius_transform(mobius_transform(p, m1), m1.inverse());
        CHECK(back.mu() == doctest::Approx(p.mu()).epsilon(1e-12));
        CHECK(back.sigma() == doctest::Approx(p.sigma()).epsilon(1e-12));
    }
}

TEST_CASE("transform_data") {
    const std::vector<double> xs{2.0, -0.5};
    const auto r = transform_data(xs, MobiusCoeffs::reciprocal());
    CHECK(r[0] == 0.5);
    CHECK(r[1] == -2.0);
    CHECK(transform_data(xs, MobiusCoeffs::identity()) == xs);
    const std::vector<double> bad{1.0, 0.0};
    try {
        transform_data(bad, MobiusCoeffs::reciprocal());
        FAIL("expected a pole error");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("data[1]") != std::string::npos);
    }
}

TEST_CASE("reciprocal of Cauchy draws is Cauchy with transformed parameters") {
    const CauchyParams p(1.0, 1.0);
    const auto r = transform_data(sample(100000, p, 5, 0), MobiusCoeffs::reciprocal());
    const CauchyParams q(0.5, 0.5);
    CHECK(oracle::ks_p(r, [&](double x) { return oracle::std_cauchy_cdf((x - q.mu()) / q.sigma()); }) > 0.01);
}
