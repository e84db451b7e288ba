#include "cauchy_im/cli.hpp"
#include "cauchy_im/estimators.hpp"
#include "cauchy_im/validation.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace cauchy_im;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "cauchy_im");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& content) {
    const fs::path dir = fs::temp_directory_path() / "cauchy_im_cli_test";
    fs::create_directories(dir);
    const fs::path p = dir / name;
    std::ofstream(p) << content;
    return p.string();
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) {
        v.push_back(l);
    }
    return v;
}

std::string strip_timing(const std::string& json) {
    std::string r;
    for (const auto& l : lines(json)) {
        if (l.find("\"runtime_seconds\"") == std::string::npos && l.find("\"timestamp\"") == std::string::npos) {
            r += l + '\n';
        }
    }
    return r;
}

}  // namespace

TEST_CASE("data file parsing") {
    CHECK(parse_data("# header\n1.5\n\n  -2e3 \n+4\n") == std::vector<double>{1.5, -2000.0, 4.0});
    try {
        parse_data("1\n2\nx3\n", "f.txt");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("f.txt:3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_data("# only a comment\n"), ParseError);
    CHECK_THROWS_AS(parse_data("1\ninf\n"), ParseError);
    CHECK_THROWS_AS(parse_data("1 2\n"), ParseError);
    CHECK_THROWS_AS(read_data_file("/nonexistent/file"), ParseError);
}

TEST_CASE("grid parsing") {
    const auto g = parse_grid("-10:10:401");
    REQUIRE(g.size() == 401);
    CHECK(g.front() == -10.0);
    CHECK(g.back() == 10.0);
    CHECK(g[220] == doctest::Approx(1.0).epsilon(1e-15));
    for (const char* bad : {"1:2", "1:2:3:4", "2:1:5", "0:1:1", "a:1:5", "0:1:x"}) {
        CHECK_THROWS_AS(parse_grid(bad), ParseError);
    }
}

TEST_CASE("plaus reproduces the single-observation curve") {
    const auto data = temp_file("zero.txt", "0\n");
    const auto r = run({"plaus", data, "--mu-grid", "-10:10:401", "--sigma", "1"});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 402);
    CHECK(rows[0] == "mu,plausibility");
    CHECK(rows[1 + 220] == "1.000000,0.500000");
    CHECK(rows[1 + 200] == "0.000000,1.000000");
    CHECK(rows[1 + 180] == "-1.000000,0.500000");
    // CSV round trip against the closed form
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto comma = rows[i].find(',');
        const double mu = std::stod(rows[i].substr(0, comma)), pl = std::stod(rows[i].substr(comma + 1));
        CHECK(std::abs(pl - (1.0 - 2.0 * std::atan(std::abs(mu)) / M_PI)) < 1e-6);
    }
    const auto empty = temp_file("empty.txt", "");
    const auto e = run({"plaus", empty});
    CHECK(e.code == 2);
    CHECK(e.err.find("no data") != std::string::npos);
    CHECK(run({"plaus", data, "--mu-grid", "5:1:10"}).code == 2);
}

TEST_CASE("marginal intervals") {
    const auto pm = temp_file("pm.txt", "-1\n1\n");
    const auto r = run({"marginal", pm, "--param", "mu", "--level", "0.5", "--out", temp_file("curve.csv", "")});
    REQUIRE(r.code == 0);
    const auto s = nlohmann::json::parse(lines(r.out).back());
    CHECK(s.at("param") == "mu");
    CHECK(std::abs(s.at("lower").get<double>() + s.at("upper").get<double>()) <= 1e-6);
    const auto sg = run({"marginal", pm, "--param", "sigma"});
    REQUIRE(sg.code == 0);
    CHECK(lines(sg.out).front() == "sigma,plausibility");
    CHECK(nlohmann::json::parse(lines(sg.out).back()).at("lower").get<double>() > 0.0);

    const std::vector<double> x{0.3, -1.2, 2.5, 0.9, 4.1};
    const auto data = temp_file("five.txt", "0.3\n-1.2\n2.5\n0.9\n4.1\n");
    const auto post = pitman_posterior_marginals(x);
    for (const char* param : {"mu", "sigma"}) {
        const auto out = run({"marginal", data, "--param", param, "--level", "0.95", "--precision", "10", "--out",
                              temp_file("curve2.csv", "")});
        REQUIRE(out.code == 0);
        const auto j = nlohmann::json::parse(lines(out.out).back());
        const auto& g = std::string(param) == "mu" ? post.mu : post.sigma;
        CHECK(std::abs(j.at("lower").get<double>() - g.quantile(0.025)) <= 1e-4);
        CHECK(std::abs(j.at("upper").get<double>() - g.quantile(0.975)) <= 1e-4);
    }
    const auto tie = temp_file("tie.txt", "1\n1\n3\n");
    const auto t = run({"marginal", tie});
    CHECK(t.code == 3);
    CHECK(t.err.find("degenerate sample") != std::string::npos);
    CHECK(run({"marginal", pm, "--param", "nu"}).code == 2);
}

TEST_CASE("joint surface") {
    const auto data = temp_file("joint.txt", "-0.4\n0.2\n1.1\n");
    const auto r = run({"joint", data, "--mu-grid", "-3:3:13", "--sigma-grid", "0.1:3:9", "--level", "0.9", "--param",
                        "sigma"});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    CHECK(rows.front() == "mu,sigma,plausibility");
    CHECK(rows.size() == 1 + 13 * 9 + 1);
    const auto j = nlohmann::json::parse(rows.back());
    CHECK(j.at("param") == "sigma");
    CHECK(j.at("lower").get<double>() > 0.0);
    CHECK(run({"joint", data, "--sigma-grid", "-1:1:5"}).code == 2);
}

TEST_CASE("estimate") {
    const auto three = temp_file("three.txt", "1\n2\n3\n");
    const auto pm = temp_file("pm2.txt", "-1\n1\n");
    auto j = nlohmann::ordered_json::parse(run({"estimate", three, "--method", "mean"}).out);
    CHECK(j.at("estimate").get<double>() == 2.0);
    CHECK(j.begin().key() == "method");
    j = nlohmann::ordered_json::parse(run({"estimate", pm, "--method", "pitman", "--sigma", "1"}).out);
    CHECK(j.at("estimate").get<double>() == 0.0);
    CHECK(run({"estimate", pm, "--method", "pitman"}).code == 2);
    CHECK(run({"estimate", pm, "--method", "mle"}).code == 3);
    CHECK(run({"estimate", pm}).code == 2);
    j = nlohmann::ordered_json::parse(run({"estimate", three, "--method", "mle"}).out);
    CHECK(j.at("estimate").at("mu").get<double>() == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("validate") {
    const auto basic = temp_file("basic.json", R"({"n": 1, "mu": 0, "sigma": 1, "method": "basic", "level": 0.95, "n_sim": 10000})");
    const auto a = run({"validate", "--scenario", basic, "--seed", "5"});
    const auto b = run({"validate", "--scenario", basic, "--seed", "5", "--threads", "2"});
    REQUIRE(a.code == 0);
    CHECK(strip_timing(a.out) == strip_timing(b.out));
    const auto report = SimulationReport::from_json(a.out);
    CHECK(report.uniformity.ks_p > 0.01);
    CHECK(report.scenario.seed == 5);

    setenv("CAUCHY_IM_SEED", "5", 1);
    const auto c = run({"validate", "--scenario", basic});
    unsetenv("CAUCHY_IM_SEED");
    CHECK(strip_timing(c.out) == strip_timing(a.out));

    const auto neg = temp_file("neg.json", R"({"n": 1, "mu": 0, "sigma": 1, "method": "basic", "level": 0.95, "n_sim": 10000, "shrink": 0.8})");
    const auto n = run({"validate", "--scenario", neg});
    CHECK(n.code == 1);
    CHECK(nlohmann::json::parse(n.out).at("metrics").at("dominance_pass") == false);

    CHECK(run({"validate", "--scenario", temp_file("bad.json", R"({"n": 1, "mu": 0})")}).code == 2);
    CHECK(run({"validate", "--scenario", temp_file("bad2.json", "not json")}).code == 2);
    CHECK(run({"validate"}).code == 2);
    CHECK(run({}).code == 2);
}
