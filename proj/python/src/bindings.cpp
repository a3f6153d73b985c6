// Python bindings: measures, kernels, assembly, spectra, fits, Weyl predictions and the pipeline.
// JSON-shaped results cross the boundary as strings; the Python package decodes them.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sspectra/error.hpp"
#include "sspectra/runner.hpp"

namespace py = pybind11;
using namespace sspectra;
using nlohmann::json;

namespace {

Sign sign_arg(const std::string& s) { return sign_from_string(s); }

std::optional<FitWindow> window_arg(const std::optional<std::pair<std::size_t, std::size_t>>& w) {
    if (!w) return std::nullopt;
    return FitWindow{w->first, w->second};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Spectra of weighted singular integral operators on singular measures";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::enum_<MeasureKind>(m, "MeasureKind")
        .value("circle", MeasureKind::circle)
        .value("lipschitz_graph", MeasureKind::lipschitz_graph)
        .value("cantor_ifs", MeasureKind::cantor_ifs)
        .value("lebesgue_cube", MeasureKind::lebesgue_cube);

    py::class_<SingularMeasure>(m, "SingularMeasure")
        .def_readonly("ambient_dim", &SingularMeasure::ambient_dim)
        .def_readonly("kind", &SingularMeasure::kind)
        .def_readonly("points", &SingularMeasure::points)
        .def_readonly("weights", &SingularMeasure::weights)
        .def_readonly("intrinsic_dim", &SingularMeasure::intrinsic_dim)
        .def_readonly("resolution", &SingularMeasure::resolution)
        .def_readonly("diameter", &SingularMeasure::diameter)
        .def_readonly("alpha_nominal", &SingularMeasure::alpha_nominal)
        .def("total_mass", &SingularMeasure::total_mass)
        .def("__len__", &SingularMeasure::size)
        .def("fingerprint", [](const SingularMeasure& s) { return fingerprint(s); });

    m.def("make_circle", &make_circle, py::arg("n_atoms"), py::arg("radius") = 1.0);
    m.def("make_cantor", &make_cantor, py::arg("depth"), py::arg("contraction"), py::arg("product_dims") = 1,
          py::arg("ambient_dim") = 1);
    m.def("make_lebesgue_cube", &make_lebesgue_cube, py::arg("n_per_side"), py::arg("ambient_dim"));
    m.def(
        "make_graph",
        [](std::vector<double> lower, std::vector<double> upper, std::vector<std::size_t> cells,
           const std::function<double(std::vector<double>)>& phi, double lipschitz_bound) {
            const auto grid = GridAxes::uniform(lower, upper, cells);
            return make_lipschitz_graph(
                grid, 1,
                [&](Point x) { return Eigen::VectorXd::Constant(1, phi(std::vector<double>(x.begin(), x.end()))); },
                lipschitz_bound);
        },
        py::arg("lower"), py::arg("upper"), py::arg("cells"), py::arg("phi"), py::arg("lipschitz_bound") = 100.0,
        "Codimension-one graph y = phi(x) over a uniform grid.");
    m.def(
        "measure_class_report_json",
        [](const SingularMeasure& s, std::optional<double> alpha_test, bool interior_only) {
            ClassReportOptions o;
            o.alpha_test = alpha_test;
            o.interior_only = interior_only;
            return to_json(measure_class_report(s, o)).dump();
        },
        py::arg("measure"), py::arg("alpha_test") = std::nullopt, py::arg("interior_only") = false);

    py::class_<KernelSpec>(m, "KernelSpec")
        .def_property_readonly("theta", &KernelSpec::theta)
        .def_property_readonly("hermitian", &KernelSpec::hermitian)
        .def("eval", [](const KernelSpec& k, std::vector<double> x, std::vector<double> y) { return k.eval_scalar(x, y); })
        .def("to_json", [](const KernelSpec& k) { return k.to_json().dump(); })
        .def_static("from_json", [](const std::string& s) { return KernelSpec::from_json(json::parse(s)); });
    m.def(
        "riesz_kernel", [](int N, double theta, double amplitude) { return riesz_kernel(N, theta, Coefficient::constant(amplitude)); },
        py::arg("N"), py::arg("theta"), py::arg("amplitude") = 1.0);
    m.def(
        "log_kernel", [](int N, double Q) { return log_kernel(N, Coefficient::constant(Q)); }, py::arg("N"), py::arg("Q") = 1.0);
    m.def(
        "add_lower_order",
        [](const KernelSpec& k, double degree, double amplitude) {
            return add_lower_order(k, KernelTerm::riesz(degree, Coefficient::constant(amplitude)));
        },
        py::arg("kernel"), py::arg("degree"), py::arg("amplitude") = 1.0);
    m.def(
        "apply_exp_multiplier",
        [](const KernelSpec& k, double scale, bool symmetric) {
            return apply_multiplier(k, MultiplierSpec{Coefficient::exp_dot(scale, k.matrix_size())}, std::nullopt, symmetric);
        },
        py::arg("kernel"), py::arg("scale") = 1.0, py::arg("symmetric") = true, "Multiplier exp(scale X.Y).");

    m.def(
        "assemble",
        [](const SingularMeasure& s, const KernelSpec& k, std::optional<std::vector<cplx>> weights, const std::string& rule) {
            WeightField F = weights ? WeightField(s.size(), 1, *weights, "python") : WeightField::constant(s.size(), 1.0);
            const OperatorMatrix a = assemble(s, k, F, F.adjoint(), diagonal_rule_from_string(rule));
            return py::make_tuple(a.entries, a.hermitian);
        },
        py::arg("measure"), py::arg("kernel"), py::arg("weights") = std::nullopt, py::arg("diagonal_rule") = "ball_average",
        "Matrix of T with F2 = F1*; returns (entries, hermitian).");

    py::class_<Spectrum>(m, "Spectrum")
        .def_readonly("values", &Spectrum::values)
        .def_readonly("residual", &Spectrum::residual)
        .def_property_readonly("kind", [](const Spectrum& s) { return to_string(s.kind); })
        .def("__len__", &Spectrum::size);
    m.def(
        "hermitian_eigen", [](const Eigen::MatrixXcd& a) { return hermitian_eigen(as_operator(a, true)); }, py::arg("matrix"));
    m.def(
        "singular_values", [](const Eigen::MatrixXcd& a) { return singular_values(as_operator(a, false)); }, py::arg("matrix"));
    m.def(
        "counting", [](const Spectrum& s, double lambda, const std::string& sign) { return counting(s, lambda, sign_arg(sign)); },
        py::arg("spectrum"), py::arg("lam"), py::arg("sign") = "abs");

    py::class_<PowerFitResult>(m, "PowerFitResult")
        .def_readonly("p_hat", &PowerFitResult::p_hat)
        .def_readonly("A_hat", &PowerFitResult::A_hat)
        .def_readonly("rms_residual", &PowerFitResult::rms_residual)
        .def_property_readonly("window", [](const PowerFitResult& r) { return py::make_tuple(r.window.lo, r.window.hi); });
    m.def(
        "fit_power_law",
        [](const std::vector<double>& values, std::pair<std::size_t, std::size_t> window) {
            return fit_power_law(values, FitWindow{window.first, window.second});
        },
        py::arg("values"), py::arg("window"));
    m.def(
        "fit_spectrum",
        [](const Spectrum& s, const std::string& sign, std::optional<std::pair<std::size_t, std::size_t>> window) {
            return fit_power_law(s, sign_arg(sign), window_arg(window));
        },
        py::arg("spectrum"), py::arg("sign") = "+", py::arg("window") = std::nullopt);

    m.def("riesz_symbol_constant", &riesz_symbol_constant, py::arg("N"), py::arg("theta"));
    m.def("fiber_symbol_constant", &fiber_symbol_constant, py::arg("N"), py::arg("dF"), py::arg("theta"));
    m.def("sigma_weyl", &sigma_weyl, py::arg("d"), py::arg("dF"), py::arg("l"));
    m.def(
        "exponent_table_json", [](double N, double alpha, double l, double g1) { return to_json(exponent_table<double>(N, alpha, l, g1)).dump(); },
        py::arg("N"), py::arg("alpha"), py::arg("l"), py::arg("gamma1"));
    m.def(
        "weyl_coefficient_json",
        [](const SingularMeasure& s, const KernelSpec& k, const std::string& normalization) {
            return to_json(weyl_coefficient(s, k, WeightField::constant(s.size(), 1.0), normalization_from_string(normalization)))
                .dump();
        },
        py::arg("measure"), py::arg("kernel"), py::arg("normalization") = "canonical", "Weyl prediction for F = 1.");
    m.def(
        "circle_fourier_coefficient",
        [](double theta, long n, bool log) { return circle_fourier_coefficient(theta, n, log ? OracleKernel::log : OracleKernel::riesz); },
        py::arg("theta"), py::arg("n"), py::arg("log") = false);
    m.def(
        "circle_oracle_json",
        [](double theta, long n_max, bool log) {
            return to_json(circle_oracle(theta, n_max, log ? OracleKernel::log : OracleKernel::riesz)).dump();
        },
        py::arg("theta"), py::arg("n_max"), py::arg("log") = false);

    m.def(
        "run_experiment_json",
        [](const std::string& config) {
            py::gil_scoped_release release;
            return run_experiment(config_from_json(json::parse(config))).to_json().dump();
        },
        py::arg("config"));
    m.def(
        "verify_json",
        [](const std::string& report) {
            std::ostringstream out;
            const int code = verify(json::parse(report), out);
            return py::make_tuple(code, out.str());
        },
        py::arg("report"));
    m.def("deterministic_part_json", [](const std::string& r) { return deterministic_part(json::parse(r)).dump(); });
}
