#include "cauchy_im/conditional.hpp"
#include "cauchy_im/errors.hpp"
#include "cauchy_im/estimators.hpp"
#include "cauchy_im/rng.hpp"
#include "cauchy_im/uniformity.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace cauchy_im;

namespace {

std::vector<double> cauchy_sample(std::uint64_t seed, std::uint64_t stream, std::size_t n, double mu = 0.0,
                                  double sigma = 1.0) {
    StreamRng rng(seed, stream);
    std::vector<double> x(n);
    for (auto& v : x) {
        v = mu + sigma * std::tan(std::numbers::pi * (rng.uniform() - 0.5));
    }
    return x;
}

double sum_log_kernel(const std::vector<double>& x, double mu, double sigma) {
    double s = 0.0;
    for (double v : x) {
        const double r = (v - mu) / sigma;
        s -= std::log1p(r * r) + std::log(std::numbers::pi * sigma);
    }
    return s;
}

double iqr(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[3 * v.size() / 4] - v[v.size() / 4];
}

}  // namespace

TEST_CASE("sample mean") {
    CHECK(sample_mean(std::vector<double>{1, 2, 3}) == 2.0);
    CHECK(sample_mean(std::vector<double>{-4.5}) == -4.5);
    // the mean of n standard Cauchy draws is again standard Cauchy
    std::vector<double> means;
    for (std::uint64_t r = 0; r < 10000; ++r) {
        means.push_back(sample_mean(cauchy_sample(5, r, 10)));
    }
    CHECK(oracle::ks_p(means, oracle::std_cauchy_cdf) > 0.01);
}

TEST_CASE("trimmed mean") {
    const std::vector<double> x{-100, 0, 1, 2, 100};
    CHECK(trimmed_mean(x, 0.2) == doctest::Approx(1.0));
    CHECK(trimmed_mean(x, 0.0) == doctest::Approx(sample_mean(x)));
    CHECK(trimmed_mean(x, 0.19) == doctest::Approx(sample_mean(x)));
    CHECK_THROWS_AS(trimmed_mean(x, 0.5), DomainError);
    CHECK_THROWS_AS(trimmed_mean(x, -0.1), DomainError);
    std::vector<double> tm, sm;
    for (std::uint64_t r = 0; r < 10000; ++r) {
        const auto s = cauchy_sample(6, r, 100);
        tm.push_back(trimmed_mean(s, 0.24));
        sm.push_back(sample_mean(s));
    }
    // The sample mean stays C(0, 1), IQR 2. The trimmed mean is asymptotically normal with
    // variance [int_{-q}^{q} x^2 f + 2 a q^2] / (1 - 2a)^2 / n, q = F^{-1}(1 - a).
    const double a = 0.24, q = std::tan(std::numbers::pi * (0.5 - a));
    const double v = ((2.0 / std::numbers::pi) * (q - std::atan(q)) + 2.0 * a * q * q) / ((1 - 2 * a) * (1 - 2 * a));
    const double expected = 2.0 / (2.0 * 0.6744897501960817 * std::sqrt(v / 100.0));
    CHECK(iqr(sm) / iqr(tm) == doctest::Approx(expected).epsilon(0.05));
    CHECK(iqr(sm) / iqr(tm) > 5.0);
}

TEST_CASE("Pitman estimator") {
    CHECK(std::abs(pitman_estimator(std::vector<double>{-1.0, 1.0}, 1.0)) <= 1e-10);
    CHECK(pitman_estimator(std::vector<double>{2.5, 2.5}, 1.0) == doctest::Approx(2.5).epsilon(1e-10));
    CHECK_THROWS_AS(pitman_estimator(std::vector<double>{1.0}, 1.0), DomainError);
    CHECK_THROWS_AS(pitman_estimator(std::vector<double>{1.0, 2.0}, -1.0), DomainError);

    const std::vector<double> x{0.0, 1.0, 5.0};
    // 10^7-node midpoint sum in theta, mu = tan(theta)
    const long n = 10000000;
    const double h = std::numbers::pi / n;
    double num = 0.0, den = 0.0;
    for (long i = 0; i < n; ++i) {
        const double th = -0.5 * std::numbers::pi + (i + 0.5) * h;
        const double mu = std::tan(th);
        const double c = std::cos(th);
        const double w = std::exp(sum_log_kernel(x, mu, 1.0)) / (c * c);
        num += mu * w;
        den += w;
    }
    CHECK(std::abs(pitman_estimator(x, 1.0) - num / den) <= 1e-6);
}

TEST_CASE("flat-prior posterior") {
    const auto one = bayes_posterior_mu_flat(std::vector<double>{1.5}, 2.0);
    for (double mu = -20; mu <= 20; mu += 0.5) {
        CHECK(one.pdf(mu) == doctest::Approx(pdf(mu, CauchyParams(1.5, 2.0))).epsilon(1e-10));
    }
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto x = cauchy_sample(8, seed, 3 + seed);
        const auto post = bayes_posterior_mu_flat(x, 1.0);
        CHECK(std::abs(post.mean() - pitman_estimator(x, 1.0)) <= 1e-8);
        const ConditionalIM im(x, 1.0);
        for (double mu0 = -5; mu0 <= 5; mu0 += 0.5) {
            CHECK(std::abs(post.cdf(mu0) -
                           im.evaluate(Assertion::at_most(mu0), RandomSetKind::one_sided_upper).plausibility) <= 1e-7);
        }
    }
}

TEST_CASE("log-likelihood gradient matches finite differences") {
    const auto x = cauchy_sample(3, 0, 12);
    for (const auto [mu, sigma] : {std::pair{0.3, 1.2}, std::pair{-2.0, 0.5}, std::pair{4.0, 3.0}}) {
        const auto g = log_likelihood_gradient(x, mu, sigma);
        const double h = 1e-6;
        const double gm = (log_likelihood(x, mu + h, sigma) - log_likelihood(x, mu - h, sigma)) / (2 * h);
        const double gs = (log_likelihood(x, mu, sigma + h) - log_likelihood(x, mu, sigma - h)) / (2 * h);
        CHECK(g[0] == doctest::Approx(gm).epsilon(1e-6));
        CHECK(g[1] == doctest::Approx(gs).epsilon(1e-6));
    }
    CHECK(log_likelihood(x, 0.3, 1.2) == doctest::Approx(sum_log_kernel(x, 0.3, 1.2)).epsilon(1e-14));
}

TEST_CASE("joint MLE") {
    SUBCASE("symmetric data") {
        const std::vector<double> x{-10, -3, -1, 0, 1, 3, 10};
        const auto fit = mle_joint(x);
        CHECK(std::abs(fit.mu) <= 1e-6);
        CHECK(fit.gradient_norm <= 1e-6);
    }
    SUBCASE("consistency at n = 5000") {
        const auto x = cauchy_sample(17, 0, 5000, 2.0, 3.0);
        const auto fit = mle_joint(x, 5);
        CHECK(std::abs(fit.mu - 2.0) <= 0.15);
        CHECK(std::abs(fit.sigma - 3.0) <= 0.2);
        CHECK(fit.gradient_norm <= 1e-6);
    }
    SUBCASE("all starts agree for n > 3") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto x = cauchy_sample(21, seed, 4 + seed % 7);
            const auto fit = mle_joint(x, 20, seed);
            REQUIRE(fit.runs.size() == 20);
            for (const auto& r : fit.runs) {
                CHECK(r.converged);
                CHECK(std::hypot(r.mu - fit.mu, r.sigma - fit.sigma) <= 1e-5);
            }
            // first-order condition, also by finite differences
            const double h = 1e-6 * fit.sigma;
            CHECK(std::abs(log_likelihood(x, fit.mu + h, fit.sigma) - log_likelihood(x, fit.mu - h, fit.sigma)) / (2 * h) <= 1e-4);
            CHECK(fit.gradient_norm <= 1e-6);
        }
    }
    SUBCASE("equivariance") {
        const auto x = cauchy_sample(4, 1, 9);
        const auto fit = mle_joint(x);
        std::vector<double> y = x;
        for (auto& v : y) {
            v = 2.5 * v - 7.0;
        }
        const auto fy = mle_joint(y);
        CHECK(fy.mu == doctest::Approx(2.5 * fit.mu - 7.0).epsilon(1e-8));
        CHECK(fy.sigma == doctest::Approx(2.5 * fit.sigma).epsilon(1e-8));
    }
    CHECK_THROWS_AS(mle_joint(std::vector<double>{1, 2}), DegenerateDataError);
    CHECK_THROWS_AS(mle_joint(std::vector<double>{1, 1, 1, 1}), DegenerateDataError);
}

TEST_CASE("location estimators are translation equivariant") {
    const auto x = cauchy_sample(12, 0, 8);
    const double c = -4.75;
    std::vector<double> y = x;
    for (auto& v : y) {
        v += c;
    }
    CHECK(trimmed_mean(y, 0.2) == doctest::Approx(trimmed_mean(x, 0.2) + c).epsilon(1e-12));
    CHECK(pitman_estimator(y, 1.0) == doctest::Approx(pitman_estimator(x, 1.0) + c).epsilon(1e-9));
    CHECK(sample_mean(y) == doctest::Approx(sample_mean(x) + c).epsilon(1e-12));
}

TEST_CASE("profile likelihood landscape") {
    SUBCASE("single observation") {
        std::vector<double> grid;
        for (double mu = -5; mu <= 5.001; mu += 0.1) {
            grid.push_back(mu);
        }
        const auto L = profile_landscape_mu(std::vector<double>{0.33}, 1.0, grid);
        REQUIRE(L.maxima.size() == 1);
        CHECK(L.maxima[0] == doctest::Approx(0.33).epsilon(1e-10));
        CHECK(L.non_global_maxima() == 0);
        const auto A = profile_landscape_mu(std::vector<double>{0.33}, 1.0);
        REQUIRE(A.maxima.size() == 1);
        CHECK(A.maxima[0] == doctest::Approx(0.33).epsilon(1e-10));
    }
    SUBCASE("two separated bumps") {
        const std::vector<double> x{-5.0, 5.0};
        const auto L = profile_landscape_mu(x, 0.1);
        REQUIRE(L.maxima.size() == 2);
        CHECK(L.maxima[0] == doctest::Approx(-5.0).epsilon(1e-3));
        CHECK(L.maxima[1] == doctest::Approx(5.0).epsilon(1e-3));
        // dense evaluation agrees
        int count = 0;
        const double h = 1e-4;
        for (double mu = -8; mu <= 8; mu += h) {
            const double a = sum_log_kernel(x, mu - h, 0.1), b = sum_log_kernel(x, mu, 0.1), c = sum_log_kernel(x, mu + h, 0.1);
            count += b > a && b > c;
        }
        CHECK(count == 2);
    }
    SUBCASE("automatic grid finds the same maxima as a dense scan") {
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            const auto x = cauchy_sample(31, seed, 40);
            const auto A = profile_landscape_mu(x, 1.0);
            const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
            std::vector<double> grid;
            for (double mu = *lo - 2; mu <= *hi + 2; mu += 2e-3) {
                grid.push_back(mu);
            }
            const auto D = profile_landscape_mu(x, 1.0, grid);
            REQUIRE(A.maxima.size() == D.maxima.size());
            for (std::size_t i = 0; i < A.maxima.size(); ++i) {
                CHECK(A.maxima[i] == doctest::Approx(D.maxima[i]).epsilon(1e-9));
                // strict: both neighbours lower
                const double v = sum_log_kernel(x, A.maxima[i], 1.0);
                CHECK(sum_log_kernel(x, A.maxima[i] - 1e-4, 1.0) < v);
                CHECK(sum_log_kernel(x, A.maxima[i] + 1e-4, 1.0) < v);
            }
            // the global maximum is among the detected maxima
            const auto it = std::max_element(D.log_likelihood.begin(), D.log_likelihood.end());
            const double best_grid = D.grid[static_cast<std::size_t>(it - D.log_likelihood.begin())];
            CHECK(std::abs(A.maxima[A.global_index] - best_grid) <= 2e-3);
        }
    }
}

TEST_CASE("Pitman posterior marginals") {
    SUBCASE("symmetric pair") {
        const auto m = pitman_posterior_marginals(std::vector<double>{-1.0, 1.0});
        for (double mu = 0.05; mu < 10; mu += 0.37) {
            CHECK(m.mu.pdf(mu) == doctest::Approx(m.mu.pdf(-mu)).epsilon(1e-9));
        }
        CHECK(m.mu.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-9));
    }
    SUBCASE("independent double quadrature") {
        const std::vector<double> x{0.0, 1.0, 5.0, -0.7};
        const auto m = pitman_posterior_marginals(x);
        // joint kernel on (mu, y = log sigma): prod f(x_i; mu, e^y)
        auto kern = [&](double mu, double y) { return std::exp(sum_log_kernel(x, mu, std::exp(y))); };
        auto mu_marg = [&](double mu) { return oracle::trapezoid([&](double y) { return kern(mu, y); }, -25, 25, 2500); };
        auto sigma_marg = [&](double s) {
            return oracle::tan_trapezoid([&](double mu) { return std::log(kern(mu, std::log(s)) / s); }, -INFINITY,
                                         INFINITY, 4000);
        };
        const double z_mu = oracle::tan_trapezoid([&](double mu) { return std::log(mu_marg(mu)); }, -INFINITY,
                                                  INFINITY, 20000);
        const double z_sigma = oracle::half_line(sigma_marg, -20, 20, 8000);
        for (double mu = -4; mu <= 8; mu += 0.31) {
            CHECK(std::abs(m.mu.pdf(mu) - mu_marg(mu) / z_mu) <= 1e-6);
        }
        for (double s = 0.1; s <= 12; s += 0.29) {
            CHECK(std::abs(m.sigma.pdf(s) - sigma_marg(s) / z_sigma) <= 1e-6);
        }
    }
    CHECK_THROWS_AS(pitman_posterior_marginals(std::vector<double>{1.0}), DomainError);
}
