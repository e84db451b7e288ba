#include "cauchy_im/estimators.hpp"

#include "cauchy_im/cauchy.hpp"
#include "cauchy_im/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace cauchy_im {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite(std::span<const double> data, const char* who) {
    if (data.empty()) {
        throw DomainError(std::string(who) + ": empty data");
    }
    for (double x : data) {
        if (!std::isfinite(x)) {
            throw DomainError(std::string(who) + ": data must be finite");
        }
    }
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Half the interquartile range, the natural scale estimate for a Cauchy sample.
double half_iqr(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    auto q = [&](double p) {
        const double pos = p * static_cast<double>(v.size() - 1);
        const std::size_t i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        return i + 1 < v.size() ? v[i] * (1.0 - frac) + v[i + 1] * frac : v[i];
    };
    return 0.5 * (q(0.75) - q(0.25));
}

double sum_log_kernel(std::span<const double> data, double mu, double sigma) {
    double s = 0.0;
    for (double x : data) {
        const double r = (x - mu) / sigma;
        s -= std::log1p(r * r);
    }
    return s;
}

}  // namespace

double sample_mean(std::span<const double> data) {
    require_finite(data, "sample_mean");
    return std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(data.size());
}

double trimmed_mean(std::span<const double> data, double trim_fraction) {
    require_finite(data, "trimmed_mean");
    if (!(trim_fraction >= 0.0 && trim_fraction < 0.5)) {
        throw DomainError("trimmed_mean: trim fraction must lie in [0, 0.5)");
    }
    std::vector<double> v(data.begin(), data.end());
    std::sort(v.begin(), v.end());
    const auto k = static_cast<std::size_t>(std::floor(trim_fraction * static_cast<double>(v.size())));
    const double sum = std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(k), v.end() - static_cast<std::ptrdiff_t>(k), 0.0);
    return sum / static_cast<double>(v.size() - 2 * k);
}

double log_likelihood(std::span<const double> data, double mu, double sigma) {
    const double n = static_cast<double>(data.size());
    return sum_log_kernel(data, mu, sigma) - n * std::log(std::numbers::pi * sigma);
}

std::array<double, 2> log_likelihood_gradient(std::span<const double> data, double mu, double sigma) {
    double gm = 0.0, gs = 0.0;
    for (double x : data) {
        const double r = (x - mu) / sigma;
        const double d = 1.0 + r * r;
        gm += 2.0 * r / (sigma * d);
        gs += (r * r - 1.0) / (sigma * d);
    }
    return {gm, gs};
}

GridDensity bayes_posterior_mu_flat(std::span<const double> data, double sigma_known) {
    require_finite(data, "bayes_posterior_mu_flat");
    if (!(sigma_known > 0.0)) {
        throw DomainError("bayes_posterior_mu_flat: sigma must be positive");
    }
    std::vector<double> x(data.begin(), data.end());
    DensityOptions opts;
    opts.center = median_of(x);
    opts.scale = sigma_known;
    opts.breakpoints = x;
    return normalize([x, sigma_known](double mu) { return sum_log_kernel(x, mu, sigma_known); }, Domain::real_line,
                     opts);
}

double pitman_estimator(std::span<const double> data, double sigma_known) {
    require_finite(data, "pitman_estimator");
    if (data.size() < 2) {
        throw DomainError("pitman_estimator: needs n > 1");
    }
    if (!(sigma_known > 0.0)) {
        throw DomainError("pitman_estimator: sigma must be positive");
    }
    std::vector<double> x(data.begin(), data.end());
    QuadratureOptions opts;
    opts.center = median_of(x);
    opts.scale = sigma_known;
    opts.breakpoints = x;
    auto lk = [&](double mu) { return sum_log_kernel(x, mu, sigma_known); };
    const double log_z = log_integrate_real_line(lk, opts);
    // Centered first moment, so the result does not cancel against a large offset.
    opts.abs_tol = 1e-13 * sigma_known;
    const double c = opts.center;
    const double m = integrate_real_line([&](double mu) { return (mu - c) * std::exp(lk(mu) - log_z); }, opts).value;
    return c + m;
}

// ---------------------------------------------------------------------------------------
// MLE

namespace {

struct NewtonOutcome {
    MleRun run;
    std::vector<OptimizerStep> trace;
};

struct LocalQuadratic {
    double g_mu, g_tau;
    double h_mumu, h_mutau, h_tautau;
};

// Gradient and Hessian of the log-likelihood in (mu, tau = log sigma).
LocalQuadratic local_quadratic(std::span<const double> data, double mu, double tau) {
    const double s = std::exp(tau);
    LocalQuadratic q{0, 0, 0, 0, 0};
    for (double x : data) {
        const double r = (x - mu) / s;
        const double d = 1.0 + r * r;
        q.g_mu += 2.0 * r / (s * d);
        q.g_tau += (r * r - 1.0) / d;
        q.h_mumu += 2.0 * (r * r - 1.0) / (s * s * d * d);
        q.h_mutau -= 4.0 * r / (s * d * d);
        q.h_tautau -= 4.0 * r * r / (d * d);
    }
    return q;
}

NewtonOutcome newton_from(std::span<const double> data, double mu, double sigma) {
    NewtonOutcome out;
    double tau = std::log(sigma);
    auto ll = [&](double m, double t) { return log_likelihood(data, m, std::exp(t)); };
    double current = ll(mu, tau);
    const double n = static_cast<double>(data.size());
    auto small_gradient = [&](const LocalQuadratic& q, double tol) {
        return std::abs(q.g_mu) * std::exp(tau) <= tol * n && std::abs(q.g_tau) <= tol * n;
    };
    constexpr int kMaxIter = 500;
    int iter = 0;
    bool converged = false;
    for (; iter < kMaxIter; ++iter) {
        out.trace.push_back({iter, mu, std::exp(tau), current});
        if (!std::isfinite(tau) || std::abs(tau) > 700.0) {
            break;
        }
        LocalQuadratic q = local_quadratic(data, mu, tau);
        if (small_gradient(q, 1e-12)) {
            converged = true;
            break;
        }
        const double s = std::exp(tau);
        const double before = current;

        // Joint step where the Hessian is negative definite.
        const double det = q.h_mumu * q.h_tautau - q.h_mutau * q.h_mutau;
        bool joint_ok = false;
        if (q.h_mumu < 0.0 && det > 0.0) {
            double dm = -(q.h_tautau * q.g_mu - q.h_mutau * q.g_tau) / det;
            double dt = -(-q.h_mutau * q.g_mu + q.h_mumu * q.g_tau) / det;
            const double shrink = std::min({1.0, 4.0 * s / std::max(std::abs(dm), 1e-300), 2.0 / std::max(std::abs(dt), 1e-300)});
            dm *= shrink;
            dt *= shrink;
            for (int k = 0; k < 40; ++k) {
                const double v = ll(mu + dm, tau + dt);
                if (v > current) {
                    mu += dm;
                    tau += dt;
                    current = v;
                    joint_ok = true;
                    break;
                }
                dm *= 0.5;
                dt *= 0.5;
            }
        }

        if (!joint_ok) {
            // Coordinate-wise: mu first (Newton, or golden section where not concave), then tau.
            double new_mu = mu;
            if (q.h_mumu < 0.0) {
                double step = std::clamp(-q.g_mu / q.h_mumu, -4.0 * s, 4.0 * s);
                for (int k = 0; k < 60; ++k) {
                    if (ll(mu + step, tau) >= current) {
                        new_mu = mu + step;
                        break;
                    }
                    step *= 0.5;
                }
            } else if (q.g_mu != 0.0) {
                const double dir = q.g_mu > 0 ? 1.0 : -1.0;
                double far = s;
                double best = current;
                while (far < 1e6 * (s + 1.0)) {
                    const double v = ll(mu + dir * far, tau);
                    if (v < best) {
                        break;
                    }
                    best = v;
                    far *= 2.0;
                }
                const double a = std::min(mu, mu + dir * far), b = std::max(mu, mu + dir * far);
                const Maximum m =
                    maximize_bracketed([&](double x) { return ll(x, tau); }, a, b, 1e-12 * (1.0 + std::abs(mu)));
                if (m.value >= current) {
                    new_mu = m.x;
                }
            }
            mu = new_mu;
            current = ll(mu, tau);

            // The tau-curvature is never positive.
            q = local_quadratic(data, mu, tau);
            if (q.h_tautau < 0.0) {
                double step = std::clamp(-q.g_tau / q.h_tautau, -2.0, 2.0);
                for (int k = 0; k < 60; ++k) {
                    const double v = ll(mu, tau + step);
                    if (v >= current) {
                        tau += step;
                        current = v;
                        break;
                    }
                    step *= 0.5;
                }
            }
        }
        if (!(current > before)) {
            // No representable ascent left in the log-likelihood. Near the optimum the gradient
            // still resolves the position, so finish with Newton steps judged by its size.
            auto grad_norm = [](const LocalQuadratic& g, double t) { return std::hypot(g.g_mu * std::exp(t), g.g_tau); };
            LocalQuadratic p = local_quadratic(data, mu, tau);
            for (int k = 0; k < 20 && !small_gradient(p, 1e-12); ++k) {
                const double det = p.h_mumu * p.h_tautau - p.h_mutau * p.h_mutau;
                if (!(p.h_mumu < 0.0 && det > 0.0)) {
                    break;
                }
                const double dm = -(p.h_tautau * p.g_mu - p.h_mutau * p.g_tau) / det;
                const double dt = -(-p.h_mutau * p.g_mu + p.h_mumu * p.g_tau) / det;
                const LocalQuadratic next = local_quadratic(data, mu + dm, tau + dt);
                if (!(grad_norm(next, tau + dt) < grad_norm(p, tau))) {
                    break;
                }
                mu += dm;
                tau += dt;
                p = next;
            }
            current = ll(mu, tau);
            converged = small_gradient(p, 1e-8);
            break;
        }
    }
    out.trace.push_back({iter, mu, std::exp(tau), current});
    out.run = {mu, std::exp(tau), current, iter, converged};
    return out;
}

}  // namespace

MleFit mle_joint(std::span<const double> data, int starts, std::uint64_t seed) {
    require_finite(data, "mle_joint");
    if (data.size() < 3) {
        throw DegenerateDataError("mle_joint: needs n >= 3");
    }
    const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
    if (*lo == *hi) {
        throw DegenerateDataError("mle_joint: all data equal");
    }
    if (starts < 1) {
        throw DomainError("mle_joint: starts must be positive");
    }
    std::vector<double> x(data.begin(), data.end());
    const double med = median_of(x);
    double scale = half_iqr(x);
    if (!(scale > 0.0)) {
        scale = 0.5 * (*hi - *lo);
    }
    StreamRng rng(seed, 0);
    MleFit fit{};
    fit.log_likelihood = -kInf;
    std::vector<OptimizerStep> last_trace;
    for (int k = 0; k < starts; ++k) {
        double mu0 = med, s0 = scale;
        if (k > 0) {
            mu0 = *lo + (*hi - *lo) * rng.uniform();
            s0 = scale * std::exp(4.0 * (rng.uniform() - 0.5));
        }
        NewtonOutcome o = newton_from(x, mu0, s0);
        fit.runs.push_back(o.run);
        if (o.run.converged && o.run.log_likelihood > fit.log_likelihood) {
            fit.mu = o.run.mu;
            fit.sigma = o.run.sigma;
            fit.log_likelihood = o.run.log_likelihood;
            fit.trace = std::move(o.trace);
        } else if (!o.run.converged) {
            last_trace = std::move(o.trace);
        }
    }
    if (!std::isfinite(fit.log_likelihood)) {
        throw OptimizationError("mle_joint: no start converged", std::move(last_trace));
    }
    const auto g = log_likelihood_gradient(x, fit.mu, fit.sigma);
    fit.gradient_norm = std::hypot(g[0], g[1]);
    return fit;
}

// ---------------------------------------------------------------------------------------
// Profile landscape

namespace {

double profile_slope(std::span<const double> data, double mu, double sigma) {
    double g = 0.0;
    for (double x : data) {
        const double d = x - mu;
        g += 2.0 * d / (sigma * sigma + d * d);
    }
    return g;
}

LikelihoodLandscape landscape_from_slopes(std::span<const double> data, double sigma, std::vector<double> grid,
                                          bool store_values) {
    LikelihoodLandscape L;
    std::vector<double> slope(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        slope[i] = profile_slope(data, grid[i], sigma);
    }
    auto fslope = [&](double mu) { return profile_slope(data, mu, sigma); };
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (slope[i] > 0.0 && slope[i + 1] <= 0.0 && grid[i + 1] - grid[i] > 0.0) {
            const double m = slope[i + 1] == 0.0 ? grid[i + 1]
                                                  : invert_monotone(fslope, 0.0, grid[i], grid[i + 1], 1e-13 * (sigma + std::abs(grid[i])));
            if (L.maxima.empty() || m > L.maxima.back()) {
                L.maxima.push_back(m);
                L.maxima_values.push_back(log_likelihood(data, m, sigma));
            }
        }
    }
    if (!L.maxima.empty()) {
        L.global_index = static_cast<std::size_t>(
            std::distance(L.maxima_values.begin(), std::max_element(L.maxima_values.begin(), L.maxima_values.end())));
    }
    if (store_values) {
        L.log_likelihood.reserve(grid.size());
        for (double g : grid) {
            L.log_likelihood.push_back(log_likelihood(data, g, sigma));
        }
    }
    L.grid = std::move(grid);
    return L;
}

}  // namespace

LikelihoodLandscape profile_landscape_mu(std::span<const double> data, double sigma, const std::vector<double>& grid) {
    require_finite(data, "profile_landscape_mu");
    if (!(sigma > 0.0)) {
        throw DomainError("profile_landscape_mu: sigma must be positive");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw DomainError("profile_landscape_mu: grid must be strictly increasing");
        }
    }
    // Strict local maxima of l are the + to - sign changes of l'.
    return landscape_from_slopes(data, sigma, grid, true);
}

LikelihoodLandscape profile_landscape_mu(std::span<const double> data, double sigma) {
    require_finite(data, "profile_landscape_mu");
    if (!(sigma > 0.0)) {
        throw DomainError("profile_landscape_mu: sigma must be positive");
    }
    std::vector<double> x(data.begin(), data.end());
    std::sort(x.begin(), x.end());
    double min_gap = kInf;
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (x[i] > x[i - 1]) {
            min_gap = std::min(min_gap, x[i] - x[i - 1]);
        }
    }
    const double h = std::max(std::min(sigma / 16.0, min_gap / 4.0), sigma / 256.0);
    // Away from every datum by more than sigma each term of l' is increasing, so l is convex
    // there; the windows [x_i - sigma, x_i + sigma] (slightly padded) hold every maximum.
    const double half = 1.0625 * sigma;
    std::vector<double> grid;
    double window_lo = x[0] - half, window_hi = x[0] + half;
    auto flush = [&]() {
        const auto steps = static_cast<long>(std::ceil((window_hi - window_lo) / h));
        for (long k = 0; k <= steps; ++k) {
            grid.push_back(window_lo + (window_hi - window_lo) * static_cast<double>(k) / static_cast<double>(steps));
        }
    };
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (x[i] - half <= window_hi) {
            window_hi = x[i] + half;
        } else {
            flush();
            window_lo = x[i] - half;
            window_hi = x[i] + half;
        }
    }
    flush();
    return landscape_from_slopes(x, sigma, std::move(grid), false);
}

// ---------------------------------------------------------------------------------------
// Pitman posterior

double pitman_log_marginal_mu(std::span<const double> data, double mu) {
    // integral over sigma of sigma^-1 prod f(x_i; mu, sigma) = integral over tau = log sigma
    // of prod f(x_i; mu, e^tau).
    std::vector<double> bps;
    std::vector<double> logs;
    std::size_t ties = 0;
    for (double x : data) {
        const double d = std::abs(x - mu);
        if (d > 0.0) {
            bps.push_back(std::log(d));
        } else {
            ++ties;
        }
    }
    // As sigma -> 0 the integrand behaves like sigma^(n - 2 ties).
    if (2 * ties >= data.size()) {
        return kInf;
    }
    QuadratureOptions opts;
    if (!bps.empty()) {
        logs = bps;
        std::sort(logs.begin(), logs.end());
        opts.center = logs[logs.size() / 2];
    }
    opts.scale = 2.0;
    opts.breakpoints = bps;
    return log_integrate_real_line(
        [&](double tau) {
            const double inv = std::exp(-tau);
            double s = -static_cast<double>(data.size()) * (std::log(std::numbers::pi) + tau);
            for (double x : data) {
                const double r = (x - mu) * inv;
                s -= std::abs(r) > 1e150 ? 2.0 * std::log(std::abs(r)) : std::log1p(r * r);
            }
            return s;
        },
        opts);
}

double pitman_log_marginal_sigma(std::span<const double> data, double sigma) {
    std::vector<double> x(data.begin(), data.end());
    QuadratureOptions opts;
    opts.center = median_of(x);
    opts.scale = sigma;
    opts.breakpoints = x;
    return -std::log(sigma) + log_integrate_real_line(
                                  [&](double mu) {
                                      double s = -static_cast<double>(x.size()) * std::log(std::numbers::pi * sigma);
                                      for (double xi : x) {
                                          const double r = (xi - mu) / sigma;
                                          s -= std::abs(r) > 1e150 ? 2.0 * std::log(std::abs(r)) : std::log1p(r * r);
                                      }
                                      return s;
                                  },
                                  opts);
}

PitmanMarginals pitman_posterior_marginals(std::span<const double> data) {
    require_finite(data, "pitman_posterior_marginals");
    if (data.size() < 2) {
        throw DomainError("pitman_posterior_marginals: needs n >= 2");
    }
    std::vector<double> x(data.begin(), data.end());
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*lo == *hi) {
        throw DegenerateDataError("pitman_posterior_marginals: all data equal");
    }
    double scale = half_iqr(x);
    if (!(scale > 0.0)) {
        scale = 0.5 * (*hi - *lo);
    }
    DensityOptions mu_opts;
    mu_opts.center = median_of(x);
    mu_opts.scale = scale;
    mu_opts.breakpoints = x;
    GridDensity mu = normalize([x](double m) { return pitman_log_marginal_mu(x, m); }, Domain::real_line, mu_opts);
    DensityOptions s_opts;
    s_opts.scale = scale;
    GridDensity sigma =
        normalize([x](double s) { return s > 0.0 ? pitman_log_marginal_sigma(x, s) : -kInf; }, Domain::positive_half_line, s_opts);
    return {std::move(mu), std::move(sigma)};
}

}  // namespace cauchy_im
