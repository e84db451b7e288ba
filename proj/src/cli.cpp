#include "cauchy_im/cli.hpp"

#include "cauchy_im/conditional.hpp"
#include "cauchy_im/errors.hpp"
#include "cauchy_im/estimators.hpp"
#include "cauchy_im/joint.hpp"
#include "cauchy_im/marginal.hpp"
#include "cauchy_im/validation.hpp"
#include "cauchy_im/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

namespace cauchy_im {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::optional<double> to_double(const std::string& token) {
    double v = 0.0;
    const char* first = token.data();
    const char* last = first + token.size();
    if (first != last && *first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last) {
        return std::nullopt;
    }
    return v;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path + ": cannot open file");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Format {
    int precision = 6;

    std::string num(double v) const {
        if (std::isnan(v)) {
            return "nan";
        }
        if (std::isinf(v)) {
            return v > 0 ? "inf" : "-inf";
        }
        if (std::abs(v) < 0.5 * std::pow(10.0, -precision)) {
            v = 0.0;  // no "-0.000000"
        }
        std::ostringstream ss;
        ss << std::fixed << std::setprecision(precision) << v;
        return ss.str();
    }
    std::string json_num(double v) const { return std::isfinite(v) ? num(v) : "null"; }
};

std::string summary_line(const Format& f, const std::string& param, double level, double lower, double upper) {
    return "{\"param\": \"" + param + "\", \"level\": " + f.json_num(level) + ", \"lower\": " + f.json_num(lower) +
           ", \"upper\": " + f.json_num(upper) + "}";
}

// Writes to the --out file when one was given, to `fallback` otherwise.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) {
                throw ParseError(path + ": cannot open for writing");
            }
            os_ = file_.get();
        }
    }
    std::ostream& operator*() { return *os_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

std::vector<double> widened(const Interval& i, std::size_t points, bool positive) {
    std::vector<double> grid(points);
    if (positive) {
        const double lo = std::log(i.lower / 2.0), hi = std::log(i.upper * 2.0);
        for (std::size_t k = 0; k < points; ++k) {
            grid[k] = std::exp(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1));
        }
    } else {
        const double half = 0.75 * (i.upper - i.lower);
        const double mid = 0.5 * (i.lower + i.upper);
        for (std::size_t k = 0; k < points; ++k) {
            grid[k] = mid - half + 2.0 * half * static_cast<double>(k) / static_cast<double>(points - 1);
        }
    }
    return grid;
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("CAUCHY_IM_SEED")) {
        const std::string s = trim(env);
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
            throw ParseError("CAUCHY_IM_SEED: not an unsigned integer: '" + s + "'");
        }
        return v;
    }
    return 0;
}

// ---------------------------------------------------------------------------------------

struct PlausArgs {
    std::string input, grid = "-10:10:401", kind = "density_contour", out;
    double sigma = 1.0;
};

int cmd_plaus(const PlausArgs& a, const Format& f, std::ostream& out) {
    const auto x = read_data_file(a.input);
    const auto grid = parse_grid(a.grid);
    const RandomSetKind kind = parse_random_set_kind(a.kind);
    std::function<double(double)> pl;
    std::shared_ptr<ConditionalIM> im;
    if (x.size() == 1) {
        if (!(a.sigma > 0.0) || !std::isfinite(a.sigma)) {
            throw DomainError("--sigma must be positive");
        }
        auto rs = std::make_shared<RandomSetSpec>(kind, std::make_shared<CauchyDistribution>(CauchyParams::standard()));
        pl = [rs, x0 = x[0], s = a.sigma](double mu) { return rs->containment_probability((x0 - mu) / s); };
    } else {
        im = std::make_shared<ConditionalIM>(x, a.sigma);
        pl = [im, kind](double mu) { return im->plausibility(mu, kind); };
    }
    Sink sink(a.out, out);
    *sink << "mu,plausibility\n";
    for (double mu : grid) {
        *sink << f.num(mu) << ',' << f.num(pl(mu)) << '\n';
    }
    return kExitOk;
}

struct RegionArgs {
    std::string input, param = "mu", grid, sigma_grid, kind = "cdf_centered", out;
    double level = 0.95;
};

void check_level(double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw DomainError("--level must lie in (0, 1)");
    }
}

int cmd_marginal(const RegionArgs& a, const Format& f, std::ostream& out) {
    check_level(a.level);
    const auto x = read_data_file(a.input);
    const RandomSetKind kind = parse_random_set_kind(a.kind);
    Interval interval;
    std::vector<double> grid;
    std::function<double(double)> pl;
    if (a.param == "mu") {
        auto im = std::make_shared<MarginalMuIM>(x);
        interval = im->interval(a.level, kind);
        grid = a.grid.empty() ? widened(im->interval(0.999, RandomSetKind::cdf_centered), 201, false) : parse_grid(a.grid);
        pl = [im, kind](double mu) { return im->plausibility(mu, kind); };
    } else {
        auto im = std::make_shared<MarginalSigmaIM>(x);
        interval = im->interval(a.level, kind);
        grid = a.grid.empty() ? widened(im->interval(0.999, RandomSetKind::cdf_centered), 201, true) : parse_grid(a.grid);
        pl = [im, kind](double s) { return s > 0.0 ? im->plausibility(s, kind) : 0.0; };
    }
    {
        Sink sink(a.out, out);
        *sink << a.param << ",plausibility\n";
        for (double v : grid) {
            *sink << f.num(v) << ',' << f.num(pl(v)) << '\n';
        }
    }
    out << summary_line(f, a.param, a.level, interval.lower, interval.upper) << '\n';
    return kExitOk;
}

int cmd_joint(const RegionArgs& a, const Format& f, std::ostream& out) {
    check_level(a.level);
    const auto x = read_data_file(a.input);
    std::vector<double> mu_grid, sigma_grid;
    if (a.grid.empty() || a.sigma_grid.empty()) {
        const auto m = MarginalMuIM(x).interval(0.999, RandomSetKind::cdf_centered);
        const auto s = MarginalSigmaIM(x).interval(0.999, RandomSetKind::cdf_centered);
        mu_grid = widened(m, 61, false);
        sigma_grid = widened(s, 61, true);
    }
    if (!a.grid.empty()) {
        mu_grid = parse_grid(a.grid);
    }
    if (!a.sigma_grid.empty()) {
        sigma_grid = parse_grid(a.sigma_grid);
        if (sigma_grid.front() <= 0.0) {
            throw ParseError("--sigma-grid: values must be positive");
        }
    }
    const JointRegion region = joint_plausibility_region(x, a.level, mu_grid, sigma_grid);
    double lower = INFINITY, upper = -INFINITY;
    {
        Sink sink(a.out, out);
        *sink << "mu,sigma,plausibility\n";
        for (std::size_t i = 0; i < sigma_grid.size(); ++i) {
            for (std::size_t j = 0; j < mu_grid.size(); ++j) {
                *sink << f.num(mu_grid[j]) << ',' << f.num(sigma_grid[i]) << ',' << f.num(region.at(i, j)) << '\n';
                if (region.mask[i * mu_grid.size() + j]) {
                    const double v = a.param == "mu" ? mu_grid[j] : sigma_grid[i];
                    lower = std::min(lower, v);
                    upper = std::max(upper, v);
                }
            }
        }
    }
    if (lower > upper) {
        throw DomainError("joint: no grid point has plausibility above 1 - level; refine the grid");
    }
    out << summary_line(f, a.param, a.level, lower, upper) << '\n';
    return kExitOk;
}

struct EstimateArgs {
    std::string input, method;
    std::optional<double> sigma;
    double trim = 0.25;
    std::uint64_t seed = 0;
};

int cmd_estimate(const EstimateArgs& a, const Format& f, std::ostream& out, std::ostream& err) {
    const auto x = read_data_file(a.input);
    const std::string n = std::to_string(x.size());
    std::string body;
    if (a.method == "mean") {
        body = "\"estimate\": " + f.json_num(sample_mean(x)) + ", \"diagnostics\": {\"n\": " + n + "}";
    } else if (a.method == "trimmed") {
        body = "\"estimate\": " + f.json_num(trimmed_mean(x, a.trim)) + ", \"diagnostics\": {\"n\": " + n +
               ", \"trim\": " + f.json_num(a.trim) + "}";
    } else if (a.method == "pitman") {
        if (!a.sigma) {
            err << "estimate: --method pitman needs --sigma\n";
            return kExitUsage;
        }
        body = "\"estimate\": " + f.json_num(pitman_estimator(x, *a.sigma)) + ", \"diagnostics\": {\"n\": " + n +
               ", \"sigma\": " + f.json_num(*a.sigma) + "}";
    } else {
        const MleFit fit = mle_joint(x, 20, a.seed);
        const auto converged = std::count_if(fit.runs.begin(), fit.runs.end(), [](const MleRun& r) { return r.converged; });
        body = "\"estimate\": {\"mu\": " + f.json_num(fit.mu) + ", \"sigma\": " + f.json_num(fit.sigma) +
               "}, \"diagnostics\": {\"n\": " + n + ", \"log_likelihood\": " + f.json_num(fit.log_likelihood) +
               ", \"gradient_norm\": " + f.json_num(fit.gradient_norm) + ", \"starts\": " + std::to_string(fit.runs.size()) +
               ", \"converged_starts\": " + std::to_string(converged) + "}";
    }
    out << "{\"method\": \"" << a.method << "\", " << body << "}\n";
    return kExitOk;
}

struct ValidateArgs {
    std::string scenario, out;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
};

Scenario read_scenario(const std::string& path, std::string& test) {
    const std::string text = read_text(path);
    Scenario s;
    try {
        const auto j = nlohmann::json::parse(text);
        s.n = j.at("n").get<std::size_t>();
        s.mu = j.at("mu").get<double>();
        s.sigma = j.at("sigma").get<double>();
        s.method = parse_method(j.at("method").get<std::string>());
        s.level = j.at("level").get<double>();
        s.n_sim = j.at("n_sim").get<std::size_t>();
        if (j.contains("random_set")) {
            s.kind = parse_random_set_kind(j.at("random_set").get<std::string>());
        }
        s.shrink = j.value("shrink", 1.0);
        s.seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>() : default_seed();
        test = j.value("test", std::string("uniformity"));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": malformed scenario: " + e.what());
    } catch (const DomainError& e) {
        throw ParseError(path + ": malformed scenario: " + e.what());
    }
    if (test != "uniformity" && test != "coverage") {
        throw ParseError(path + ": test must be \"uniformity\" or \"coverage\"");
    }
    return s;
}

int cmd_validate(const ValidateArgs& a, std::ostream& out, std::ostream& err) {
    std::string test;
    Scenario s = read_scenario(a.scenario, test);
    if (a.seed) {
        s.seed = *a.seed;
    }
    const SimulationReport r = test == "coverage" ? interval_coverage(s, a.threads) : uniformity_at_truth(s, a.threads);
    {
        Sink sink(a.out, out);
        *sink << r.to_json() << '\n';
    }
    if (!r.dominance_pass) {
        err << "validate: dominance check failed (p = " << r.uniformity.dominance_p << ")\n";
        return kExitCheckFailed;
    }
    return kExitOk;
}

}  // namespace

// ---------------------------------------------------------------------------------------

std::vector<double> parse_data(const std::string& text, const std::string& source) {
    std::vector<double> values;
    std::istringstream in(text);
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        const auto v = to_double(t);
        if (!v) {
            throw ParseError(source + ":" + std::to_string(no) + ": not a number: '" + t + "'");
        }
        if (!std::isfinite(*v)) {
            throw ParseError(source + ":" + std::to_string(no) + ": value is not finite");
        }
        values.push_back(*v);
    }
    if (values.empty()) {
        throw ParseError(source + ": no data values");
    }
    return values;
}

std::vector<double> read_data_file(const std::string& path) { return parse_data(read_text(path), path); }

std::vector<double> parse_grid(const std::string& spec) {
    const auto c1 = spec.find(':');
    const auto c2 = c1 == std::string::npos ? std::string::npos : spec.find(':', c1 + 1);
    if (c2 == std::string::npos || spec.find(':', c2 + 1) != std::string::npos) {
        throw ParseError("grid '" + spec + "': expected min:max:steps");
    }
    const auto lo = to_double(trim(spec.substr(0, c1)));
    const auto hi = to_double(trim(spec.substr(c1 + 1, c2 - c1 - 1)));
    const std::string steps_text = trim(spec.substr(c2 + 1));
    std::size_t steps = 0;
    const auto [ptr, ec] = std::from_chars(steps_text.data(), steps_text.data() + steps_text.size(), steps);
    if (!lo || !hi || ec != std::errc() || ptr != steps_text.data() + steps_text.size() || steps_text.empty()) {
        throw ParseError("grid '" + spec + "': expected min:max:steps");
    }
    if (!std::isfinite(*lo) || !std::isfinite(*hi) || !(*lo < *hi) || steps < 2) {
        throw ParseError("grid '" + spec + "': need finite min < max and steps >= 2");
    }
    std::vector<double> grid(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        grid[i] = *lo + (*hi - *lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
    }
    grid.back() = *hi;
    return grid;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Inferential models for Cauchy location and scale"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    app.fallthrough();
    Format fmt;
    app.add_option("--precision", fmt.precision, "Decimal places in numeric output")->check(CLI::Range(0, 17));

    PlausArgs plaus;
    auto* p = app.add_subcommand("plaus", "Plausibility curve for mu with sigma known");
    p->add_option("input", plaus.input, "Data file")->required();
    p->add_option("--mu-grid", plaus.grid, "min:max:steps")->capture_default_str();
    p->add_option("--sigma", plaus.sigma, "Known scale")->capture_default_str();
    p->add_option("--set-kind", plaus.kind, "Random set family")->capture_default_str();
    p->add_option("--out", plaus.out, "CSV output path (default: standard output)");

    RegionArgs joint;
    auto* j = app.add_subcommand("joint", "Joint plausibility surface for (mu, sigma)");
    j->add_option("input", joint.input, "Data file")->required();
    j->add_option("--param", joint.param, "Parameter for the interval summary")->check(CLI::IsMember({"mu", "sigma"}));
    j->add_option("--level", joint.level)->capture_default_str();
    j->add_option("--grid,--mu-grid", joint.grid, "mu grid, min:max:steps");
    j->add_option("--sigma-grid", joint.sigma_grid, "sigma grid, min:max:steps");
    j->add_option("--out", joint.out, "CSV output path (default: standard output)");

    RegionArgs marg;
    auto* m = app.add_subcommand("marginal", "Marginal plausibility curve and interval");
    m->add_option("input", marg.input, "Data file")->required();
    m->add_option("--param", marg.param)->check(CLI::IsMember({"mu", "sigma"}))->capture_default_str();
    m->add_option("--level", marg.level)->capture_default_str();
    m->add_option("--grid", marg.grid, "min:max:steps");
    m->add_option("--set-kind", marg.kind, "Random set family")->capture_default_str();
    m->add_option("--out", marg.out, "CSV output path (default: standard output)");

    EstimateArgs est;
    est.seed = 0;
    auto* e = app.add_subcommand("estimate", "Point estimates of mu (and sigma)");
    e->add_option("input", est.input, "Data file")->required();
    e->add_option("--method", est.method)->required()->check(CLI::IsMember({"mean", "trimmed", "pitman", "mle"}));
    e->add_option("--sigma", est.sigma, "Known scale (pitman)");
    e->add_option("--trim", est.trim, "Fraction trimmed from each end")->check(CLI::Range(0.0, 0.5))->capture_default_str();

    ValidateArgs val;
    auto* v = app.add_subcommand("validate", "Monte Carlo validity or coverage report");
    v->add_option("--scenario", val.scenario, "Scenario JSON file")->required();
    v->add_option("--seed", val.seed, "Overrides the scenario and CAUCHY_IM_SEED");
    v->add_option("--threads", val.threads, "Worker threads (0: hardware)");
    v->add_option("--out", val.out, "Report path (default: standard output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& pe) {
        if (pe.get_exit_code() == 0) {
            out << (dynamic_cast<const CLI::CallForVersion*>(&pe) ? std::string(kVersion) + "\n" : app.help());
            return kExitOk;
        }
        err << "error: " << pe.what() << '\n';
        return kExitUsage;
    }
    try {
        if (*p) {
            return cmd_plaus(plaus, fmt, out);
        }
        if (*j) {
            return cmd_joint(joint, fmt, out);
        }
        if (*m) {
            return cmd_marginal(marg, fmt, out);
        }
        if (*e) {
            est.seed = default_seed();
            return cmd_estimate(est, fmt, out, err);
        }
        return cmd_validate(val, out, err);
    } catch (const DegenerateDataError& ex) {
        err << "degenerate sample: " << ex.what() << '\n';
        return kExitDegenerate;
    } catch (const ParseError& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& ex) {
        err << "failed: " << ex.what() << '\n';
        return kExitCheckFailed;
    }
}

}  // namespace cauchy_im
