#include "cauchy_im/conditional.hpp"
#include "cauchy_im/errors.hpp"
#include "cauchy_im/estimators.hpp"
#include "cauchy_im/im.hpp"
#include "cauchy_im/joint.hpp"
#include "cauchy_im/marginal.hpp"
#include "cauchy_im/validation.hpp"
#include "cauchy_im/version.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace cauchy_im;

using Data = std::vector<double>;

namespace {

py::tuple as_tuple(const Interval& i) { return py::make_tuple(i.lower, i.upper); }

}  // namespace

PYBIND11_MODULE(cauchy_im, m) {
    m.doc() = "Inferential models for the Cauchy location and scale";
    m.attr("__version__") = kVersion;

    auto degenerate = py::register_exception<DegenerateDataError>(m, "DegenerateDataError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<AccuracyError>(m, "AccuracyError", PyExc_ArithmeticError);
    py::register_exception<CapabilityError>(m, "CapabilityError", PyExc_TypeError);
    (void)degenerate;

    py::class_<CauchyParams>(m, "CauchyParams")
        .def(py::init<double, double>(), py::arg("mu"), py::arg("sigma"))
        .def_property_readonly("mu", &CauchyParams::mu)
        .def_property_readonly("sigma", &CauchyParams::sigma)
        .def("__repr__", [](const CauchyParams& p) {
            return "CauchyParams(mu=" + std::to_string(p.mu()) + ", sigma=" + std::to_string(p.sigma()) + ")";
        });

    m.def("pdf", &pdf, py::arg("x"), py::arg("params"));
    m.def("cdf", &cdf, py::arg("x"), py::arg("params"));
    m.def("quantile", &quantile, py::arg("p"), py::arg("params"));
    m.def("sample", &sample, py::arg("n"), py::arg("params"), py::arg("seed"), py::arg("stream") = 0);

    py::class_<MobiusCoeffs>(m, "MobiusCoeffs")
        .def(py::init<double, double, double, double>(), py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"))
        .def_static("identity", &MobiusCoeffs::identity)
        .def_static("reciprocal", &MobiusCoeffs::reciprocal)
        .def("apply", &MobiusCoeffs::apply);
    m.def("mobius_transform", &mobius_transform, py::arg("params"), py::arg("coeffs"));
    m.def("transform_data", [](const Data& x, const MobiusCoeffs& t) { return transform_data(x, t); });

    py::enum_<RandomSetKind>(m, "RandomSetKind")
        .value("cdf_centered", RandomSetKind::cdf_centered)
        .value("one_sided_lower", RandomSetKind::one_sided_lower)
        .value("one_sided_upper", RandomSetKind::one_sided_upper)
        .value("density_contour", RandomSetKind::density_contour);

    m.def("basic_plausibility", &basic_plausibility, py::arg("x"), py::arg("mu0"), py::arg("sigma") = 1.0);

    py::class_<ConditionalIM>(m, "ConditionalIM")
        .def(py::init<Data, double>(), py::arg("data"), py::arg("sigma"))
        .def("plausibility", &ConditionalIM::plausibility, py::arg("mu0"),
             py::arg("kind") = RandomSetKind::density_contour)
        .def("interval", [](const ConditionalIM& im, double level, RandomSetKind kind) { return as_tuple(im.interval(level, kind)); },
             py::arg("level"), py::arg("kind") = RandomSetKind::density_contour);

    m.def("joint_plausibility", [](const Data& x, double mu0, double sigma0) { return joint_plausibility(x, mu0, sigma0); },
          py::arg("data"), py::arg("mu0"), py::arg("sigma0"));

    py::class_<MarginalMuIM>(m, "MarginalMuIM")
        .def(py::init([](const Data& x) { return MarginalMuIM(x); }), py::arg("data"))
        .def("plausibility", &MarginalMuIM::plausibility, py::arg("mu0"), py::arg("kind") = RandomSetKind::density_contour)
        .def("interval", [](const MarginalMuIM& im, double level, RandomSetKind kind) { return as_tuple(im.interval(level, kind)); },
             py::arg("level"), py::arg("kind") = RandomSetKind::density_contour);
    py::class_<MarginalSigmaIM>(m, "MarginalSigmaIM")
        .def(py::init([](const Data& x) { return MarginalSigmaIM(x); }), py::arg("data"))
        .def("plausibility", &MarginalSigmaIM::plausibility, py::arg("sigma0"),
             py::arg("kind") = RandomSetKind::density_contour)
        .def("interval", [](const MarginalSigmaIM& im, double level, RandomSetKind kind) { return as_tuple(im.interval(level, kind)); },
             py::arg("level"), py::arg("kind") = RandomSetKind::density_contour);

    py::class_<GridDensity>(m, "GridDensity")
        .def("pdf", &GridDensity::pdf)
        .def("cdf", &GridDensity::cdf)
        .def("quantile", &GridDensity::quantile);
    m.def("g_density", [](const Data& x) { return GridDensity(*g_density(x).density); });
    m.def("z_density", [](const Data& x) { return GridDensity(*z_density(x).density); });
    m.def("pitman_posterior_marginals", [](const Data& x) {
        auto p = pitman_posterior_marginals(x);
        return py::make_tuple(p.mu, p.sigma);
    });

    m.def("sample_mean", [](const Data& x) { return sample_mean(x); });
    m.def("trimmed_mean", [](const Data& x, double trim) { return trimmed_mean(x, trim); }, py::arg("data"),
          py::arg("trim"));
    m.def("pitman_estimator", [](const Data& x, double sigma) { return pitman_estimator(x, sigma); }, py::arg("data"),
          py::arg("sigma"));
    m.def(
        "mle_joint",
        [](const Data& x, int starts, std::uint64_t seed) {
            const MleFit f = mle_joint(x, starts, seed);
            py::dict d;
            d["mu"] = f.mu;
            d["sigma"] = f.sigma;
            d["log_likelihood"] = f.log_likelihood;
            d["gradient_norm"] = f.gradient_norm;
            return d;
        },
        py::arg("data"), py::arg("starts") = 20, py::arg("seed") = 0);

    py::enum_<Method>(m, "Method")
        .value("basic", Method::basic)
        .value("conditional", Method::conditional)
        .value("joint", Method::joint)
        .value("marginal_mu", Method::marginal_mu)
        .value("marginal_sigma", Method::marginal_sigma)
        .value("bayes_flat", Method::bayes_flat)
        .value("bayes_pitman_mu", Method::bayes_pitman_mu)
        .value("bayes_pitman_sigma", Method::bayes_pitman_sigma);

    py::class_<Scenario>(m, "Scenario")
        .def(py::init<>())
        .def_readwrite("n", &Scenario::n)
        .def_readwrite("mu", &Scenario::mu)
        .def_readwrite("sigma", &Scenario::sigma)
        .def_readwrite("method", &Scenario::method)
        .def_readwrite("kind", &Scenario::kind)
        .def_readwrite("level", &Scenario::level)
        .def_readwrite("n_sim", &Scenario::n_sim)
        .def_readwrite("seed", &Scenario::seed)
        .def_readwrite("shrink", &Scenario::shrink);

    py::class_<SimulationReport>(m, "SimulationReport")
        .def_readonly("test", &SimulationReport::test)
        .def_readonly("coverage", &SimulationReport::coverage)
        .def_readonly("coverage_se", &SimulationReport::coverage_se)
        .def_readonly("dominance_pass", &SimulationReport::dominance_pass)
        .def_property_readonly("ks_p", [](const SimulationReport& r) { return r.uniformity.ks_p; })
        .def("to_json", &SimulationReport::to_json, py::arg("indent") = 2)
        .def("deterministic_json", &SimulationReport::deterministic_json);

    m.def("uniformity_at_truth", &uniformity_at_truth, py::arg("scenario"), py::arg("threads") = 0,
          py::call_guard<py::gil_scoped_release>());
    m.def("interval_coverage", &interval_coverage, py::arg("scenario"), py::arg("threads") = 0,
          py::call_guard<py::gil_scoped_release>());
    m.def("implied_log_prior", &implied_log_prior, py::arg("mu"), py::arg("sigma"), py::arg("transform"));
    m.def(
        "fiducial_conflict_demo",
        [](const Data& x, double level, const MobiusCoeffs& t) {
            const ConflictReport r = fiducial_conflict_demo(x, level, t);
            py::dict d;
            d["level"] = r.level;
            d["direct_mu"] = as_tuple(r.direct_mu);
            d["transformed_mu"] = as_tuple(r.transformed_mu);
            d["transformed_mu_star"] = as_tuple(r.transformed_mu_star);
            d["lower_discrepancy"] = r.lower_discrepancy;
            d["upper_discrepancy"] = r.upper_discrepancy;
            return d;
        },
        py::arg("data"), py::arg("level") = 0.95, py::arg("transform") = MobiusCoeffs::reciprocal());
}
