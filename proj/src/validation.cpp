#include "cauchy_im/validation.hpp"

#include "cauchy_im/conditional.hpp"
#include "cauchy_im/errors.hpp"
#include "cauchy_im/estimators.hpp"
#include "cauchy_im/joint.hpp"
#include "cauchy_im/marginal.hpp"
#include "cauchy_im/parallel.hpp"
#include "cauchy_im/version.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <ctime>
#include <limits>
#include <numbers>

namespace cauchy_im {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr std::pair<Method, const char*> kMethodNames[] = {
    {Method::basic, "basic"},
    {Method::conditional, "conditional"},
    {Method::joint, "joint"},
    {Method::marginal_mu, "marginal_mu"},
    {Method::marginal_sigma, "marginal_sigma"},
    {Method::bayes_flat, "bayes_flat"},
    {Method::bayes_pitman_mu, "bayes_pitman_mu"},
    {Method::bayes_pitman_sigma, "bayes_pitman_sigma"},
};

double centered_tail(const UnivariateDistribution& posterior, double x) {
    const double f = posterior.cdf(x);
    return std::clamp(2.0 * std::min(f, 1.0 - f), 0.0, 1.0);
}

Interval equal_tailed(const UnivariateDistribution& posterior, double level) {
    return {posterior.quantile(0.5 * (1.0 - level)), posterior.quantile(0.5 * (1.0 + level))};
}

Interval image_hull(const MonotoneMap& map, const RandomSetSpec& rs, double level) {
    const IntervalSet region = map.image(rs.level_region(1.0 - level));
    if (region.empty()) {
        throw DomainError("scenario interval: empty region");
    }
    return region.hull();
}

void check_scenario(const Scenario& s) {
    if (s.n == 0) {
        throw DomainError("scenario: n must be positive");
    }
    if (s.method == Method::basic && s.n != 1) {
        throw DomainError("scenario: the basic IM uses a single observation (n = 1)");
    }
    if (!(s.sigma > 0.0) || !std::isfinite(s.sigma) || !std::isfinite(s.mu)) {
        throw DomainError("scenario: need finite mu and sigma > 0");
    }
    if (!(s.level > 0.0 && s.level < 1.0)) {
        throw DomainError("scenario: level must lie in (0, 1)");
    }
    if (!(s.shrink > 0.0 && s.shrink <= 1.0)) {
        throw DomainError("scenario: shrink must lie in (0, 1]");
    }
    if (s.n_sim == 0) {
        throw DomainError("scenario: n_sim must be positive");
    }
}

double shrunk(double pl, double shrink) { return std::clamp(1.0 - (1.0 - pl) / shrink, 0.0, 1.0); }

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Evaluation {
    double pl = 0.0;
    Interval interval;
};

// Builds the inference once per data set; the interval is computed only when asked for.
Evaluation evaluate(const Scenario& s, std::span<const double> x, bool want_interval) {
    Evaluation e;
    auto posterior = [&](const UnivariateDistribution& post, double truth) {
        e.pl = centered_tail(post, truth);
        if (want_interval) {
            e.interval = equal_tailed(post, s.level);
        }
    };
    switch (s.method) {
        case Method::basic: {
            const RandomSetSpec rs(s.kind, std::make_shared<CauchyDistribution>(CauchyParams::standard()));
            e.pl = rs.containment_probability((x[0] - s.mu) / s.sigma);
            if (want_interval) {
                e.interval = image_hull(MonotoneMap::location(x[0], s.sigma), rs, s.level);
            }
            break;
        }
        case Method::conditional: {
            const ConditionalIM im(std::vector<double>(x.begin(), x.end()), s.sigma);
            e.pl = im.plausibility(s.mu, s.kind);
            if (want_interval) {
                e.interval = image_hull(im.map(), im.random_set(s.kind), s.level);
            }
            break;
        }
        case Method::joint:
            if (want_interval) {
                throw DomainError("scenario interval: the joint IM yields a region, not an interval");
            }
            e.pl = joint_plausibility(x, s.mu, s.sigma);
            break;
        case Method::marginal_mu: {
            const MarginalMuIM im(x);
            e.pl = im.plausibility(s.mu, s.kind);
            if (want_interval) {
                e.interval = im.interval(s.level, s.kind);
            }
            break;
        }
        case Method::marginal_sigma: {
            const MarginalSigmaIM im(x);
            e.pl = im.plausibility(s.sigma, s.kind);
            if (want_interval) {
                e.interval = im.interval(s.level, s.kind);
            }
            break;
        }
        case Method::bayes_flat: posterior(bayes_posterior_mu_flat(x, s.sigma), s.mu); break;
        case Method::bayes_pitman_mu: posterior(pitman_posterior_marginals(x).mu, s.mu); break;
        case Method::bayes_pitman_sigma: posterior(pitman_posterior_marginals(x).sigma, s.sigma); break;
    }
    return e;
}

struct Replicate {
    double pl = 0.0;
    bool covered = false;
};

SimulationReport run(const Scenario& scenario, bool intervals, unsigned threads) {
    check_scenario(scenario);
    const auto start = std::chrono::steady_clock::now();
    const CauchyParams truth(scenario.mu, scenario.sigma);
    const auto reps = parallel_map<Replicate>(scenario.n_sim, threads, [&](std::size_t r) {
        const auto x = sample(scenario.n, truth, scenario.seed, r);
        const bool use_interval = intervals && scenario.method != Method::joint && scenario.shrink == 1.0;
        const Evaluation e = evaluate(scenario, x, use_interval);
        Replicate rep;
        rep.pl = shrunk(e.pl, scenario.shrink);
        if (use_interval) {
            const double target = scenario.method == Method::marginal_sigma || scenario.method == Method::bayes_pitman_sigma
                                      ? scenario.sigma
                                      : scenario.mu;
            rep.covered = e.interval.contains(target);
        } else {
            rep.covered = rep.pl > 1.0 - scenario.level;
        }
        return rep;
    });
    SimulationReport report;
    report.test = intervals ? "coverage" : "uniformity";
    report.scenario = scenario;
    std::vector<double> pl;
    std::size_t covered = 0;
    for (const auto& r : reps) {
        pl.push_back(r.pl);
        covered += r.covered ? 1 : 0;
    }
    const double n_sim = static_cast<double>(scenario.n_sim);
    report.coverage = static_cast<double>(covered) / n_sim;
    report.coverage_se = std::sqrt(report.coverage * (1.0 - report.coverage) / n_sim);
    report.uniformity = uniformity_stats(pl);
    report.dominance_pass = report.uniformity.dominance_p > 0.01;
    report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.timestamp = utc_timestamp();
    report.version = kVersion;
    return report;
}

ordered_json report_json(const SimulationReport& r, bool provenance_times) {
    const Scenario& s = r.scenario;
    ordered_json j;
    j["test"] = r.test;
    j["scenario"] = {{"n", s.n},
                     {"mu", s.mu},
                     {"sigma", s.sigma},
                     {"method", to_string(s.method)},
                     {"random_set", to_string(s.kind)},
                     {"level", s.level},
                     {"n_sim", s.n_sim},
                     {"seed", s.seed},
                     {"shrink", s.shrink}};
    j["metrics"] = {{"coverage", r.coverage},
                    {"coverage_se", r.coverage_se},
                    {"ks_distance", r.uniformity.ks_distance},
                    {"ks_p", r.uniformity.ks_p},
                    {"dominance_distance", r.uniformity.dominance_distance},
                    {"dominance_p", r.uniformity.dominance_p},
                    {"dominance_pass", r.dominance_pass}};
    ordered_json prov;
    prov["seed"] = s.seed;
    prov["version"] = r.version;
    if (provenance_times) {
        prov["runtime_seconds"] = r.runtime_seconds;
        prov["timestamp"] = r.timestamp;
    }
    j["provenance"] = prov;
    return j;
}

}  // namespace

std::string to_string(Method method) {
    for (const auto& [m, name] : kMethodNames) {
        if (m == method) {
            return name;
        }
    }
    return "?";
}

Method parse_method(const std::string& name) {
    std::string key = name;
    std::replace(key.begin(), key.end(), '-', '_');
    for (const auto& [m, n] : kMethodNames) {
        if (key == n) {
            return m;
        }
    }
    throw DomainError("unknown method: " + name);
}

double plausibility_at_truth(const Scenario& s, std::span<const double> x) { return evaluate(s, x, false).pl; }

Interval scenario_interval(const Scenario& s, std::span<const double> x) { return evaluate(s, x, true).interval; }

SimulationReport uniformity_at_truth(const Scenario& scenario, unsigned threads) {
    if (scenario.n_sim < 1000) {
        throw DomainError("uniformity_at_truth: needs n_sim >= 1000");
    }
    return run(scenario, false, threads);
}

SimulationReport interval_coverage(const Scenario& scenario, unsigned threads) { return run(scenario, true, threads); }

std::string SimulationReport::to_json(int indent) const { return report_json(*this, true).dump(indent); }

std::string SimulationReport::deterministic_json() const { return report_json(*this, false).dump(2); }

SimulationReport SimulationReport::from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
        SimulationReport r;
        r.test = j.at("test").get<std::string>();
        const auto& s = j.at("scenario");
        r.scenario.n = s.at("n").get<std::size_t>();
        r.scenario.mu = s.at("mu").get<double>();
        r.scenario.sigma = s.at("sigma").get<double>();
        r.scenario.method = parse_method(s.at("method").get<std::string>());
        r.scenario.kind = parse_random_set_kind(s.at("random_set").get<std::string>());
        r.scenario.level = s.at("level").get<double>();
        r.scenario.n_sim = s.at("n_sim").get<std::size_t>();
        r.scenario.seed = s.at("seed").get<std::uint64_t>();
        r.scenario.shrink = s.at("shrink").get<double>();
        const auto& m = j.at("metrics");
        r.coverage = m.at("coverage").get<double>();
        r.coverage_se = m.at("coverage_se").get<double>();
        r.uniformity.ks_distance = m.at("ks_distance").get<double>();
        r.uniformity.ks_p = m.at("ks_p").get<double>();
        r.uniformity.dominance_distance = m.at("dominance_distance").get<double>();
        r.uniformity.dominance_p = m.at("dominance_p").get<double>();
        r.dominance_pass = m.at("dominance_pass").get<bool>();
        const auto& p = j.at("provenance");
        r.version = p.at("version").get<std::string>();
        r.runtime_seconds = p.value("runtime_seconds", 0.0);
        r.timestamp = p.value("timestamp", std::string());
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("SimulationReport: malformed JSON: ") + e.what());
    }
}

// ---------------------------------------------------------------------------------------
// Transformed constructions

double implied_log_prior(double mu, double sigma, const MobiusCoeffs& t) {
    if (!(sigma > 0.0)) {
        throw DomainError("implied_log_prior: sigma must be positive");
    }
    // sigma* = |det| sigma / |c theta + d|^2 and |d theta* / d theta|^2 = det^2 / |c theta + d|^4
    const double det = std::abs(t.determinant());
    const double denom = std::norm(std::complex<double>(t.c() * mu + t.d(), t.c() * sigma));
    return -std::log(sigma) + std::log(det) - std::log(denom);
}

GridDensity transformed_posterior_mu(std::span<const double> data, const MobiusCoeffs& t) {
    if (data.size() < 2) {
        throw DomainError("transformed_posterior_mu: needs n >= 2");
    }
    if (t.determinant() == 0.0) {
        throw DomainError("transformed_posterior_mu: singular transform");
    }
    const std::vector<double> x(data.begin(), data.end());
    const std::vector<double> r = transform_data(x, t);
    // Posterior of theta* given r under 1/sigma*, pulled back to theta: the kernel is the
    // likelihood of r at theta*(theta) times the implied prior on theta.
    auto log_joint = [r, t](double mu, double sigma) {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) {
            return -kInf;
        }
        const std::complex<double> theta(mu, sigma);
        const std::complex<double> ts = (t.a() * theta + t.b()) / (t.c() * theta + t.d());
        const double mu_s = ts.real(), sigma_s = std::abs(ts.imag());
        double v = implied_log_prior(mu, sigma, t);
        for (double ri : r) {
            const double z = (ri - mu_s) / sigma_s;
            v -= std::log(std::numbers::pi * sigma_s) + (std::abs(z) > 1e150 ? 2.0 * std::log(std::abs(z)) : std::log1p(z * z));
        }
        return std::isfinite(v) ? v : -kInf;
    };
    auto log_marginal = [x, log_joint](double mu) {
        std::vector<double> bps;
        for (double xi : x) {
            if (xi != mu) {
                bps.push_back(std::log(std::abs(xi - mu)));
            }
        }
        if (bps.empty()) {
            return kInf;
        }
        std::vector<double> sorted = bps;
        std::sort(sorted.begin(), sorted.end());
        QuadratureOptions opts;
        opts.center = sorted[sorted.size() / 2];
        opts.scale = 2.0;
        opts.breakpoints = bps;
        return log_integrate_real_line([&](double tau) { return tau + log_joint(mu, std::exp(tau)); }, opts);
    };
    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    DensityOptions opts;
    opts.center = sorted[sorted.size() / 2];
    opts.scale = std::max(0.5 * (sorted[(3 * sorted.size()) / 4] - sorted[sorted.size() / 4]), 1e-3 * (sorted.back() - sorted.front()));
    opts.breakpoints = x;
    return normalize(log_marginal, Domain::real_line, opts);
}

ConflictReport fiducial_conflict_demo(std::span<const double> data, double level, const MobiusCoeffs& transform) {
    if (!(level > 0.0 && level < 1.0)) {
        throw DomainError("fiducial_conflict_demo: level must lie in (0, 1)");
    }
    const std::vector<double> r = transform_data(data, transform);
    ConflictReport rep{};
    rep.level = level;
    rep.direct_mu = equal_tailed(pitman_posterior_marginals(data).mu, level);
    rep.transformed_mu = equal_tailed(transformed_posterior_mu(data, transform), level);
    rep.transformed_mu_star = equal_tailed(pitman_posterior_marginals(r).mu, level);
    rep.lower_discrepancy = rep.transformed_mu.lower - rep.direct_mu.lower;
    rep.upper_discrepancy = rep.transformed_mu.upper - rep.direct_mu.upper;
    return rep;
}

}  // namespace cauchy_im
