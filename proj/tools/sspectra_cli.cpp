// sspectra command line: measure -> assemble -> spectrum -> fit -> predict, or all at once with `run`.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sspectra/error.hpp"
#include "sspectra/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sspectra;

namespace {

struct Options {
    std::string config;
    std::string out = ".";
    std::optional<std::size_t> resolution;
    std::optional<std::string> normalization;
    std::string report;
    double theta = 0.5;
    long n_max = 16;
    bool log_kernel = false;
};

ExperimentConfig config_for(const Options& o) {
    if (o.config.empty()) throw ValidationError("--config is required");
    ExperimentConfig c = load_config(o.config);
    if (o.normalization) c.normalization = normalization_from_string(*o.normalization);
    return c;
}

std::size_t resolution_for(const Options& o, const ExperimentConfig& c) {
    return o.resolution.value_or(c.resolutions.back());
}

void dump(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

SingularMeasure measure_in(const Options& o, const ExperimentConfig& c) {
    const fs::path p = fs::path(o.out) / "measure.json";
    if (fs::exists(p)) return load_measure(p);
    return build_measure(c, resolution_for(o, c));
}

int cmd_measure(const Options& o) {
    const ExperimentConfig c = config_for(o);
    fs::create_directories(o.out);
    const SingularMeasure m = build_measure(c, resolution_for(o, c));
    save_measure(fs::path(o.out) / "measure.json", m);
    const json report = to_json(measure_class_report(m));
    dump(fs::path(o.out) / "measure_class.json", report);
    std::cout << report.dump(2) << '\n';
    return 0;
}

int cmd_assemble(const Options& o) {
    const ExperimentConfig c = config_for(o);
    fs::create_directories(o.out);
    const OperatorMatrix a = assemble_stage(c, measure_in(o, c));
    write_matrix(fs::path(o.out) / "matrix.bin", a);
    std::cout << "matrix " << a.dim() << "x" << a.dim() << (a.hermitian ? " hermitian" : " general") << '\n';
    return 0;
}

int cmd_spectrum(const Options& o) {
    const OperatorMatrix a = read_matrix(fs::path(o.out) / "matrix.bin");
    const Spectrum s = spectrum_stage(a);
    write_spectrum_csv(fs::path(o.out) / "spectrum.csv", s);
    std::cout << to_string(s.kind) << ": " << s.size() << " values, residual " << s.residual << '\n';
    return 0;
}

int cmd_fit(const Options& o) {
    ExperimentConfig c;
    if (!o.config.empty()) c = config_for(o);
    const Spectrum s = read_spectrum_csv(fs::path(o.out) / "spectrum.csv");
    const json j = to_json(fit_stage(c, s));
    dump(fs::path(o.out) / "fit.json", j);
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_predict(const Options& o) {
    const ExperimentConfig c = config_for(o);
    fs::create_directories(o.out);
    const json j = predict_stage(c, measure_in(o, c)).to_json();
    dump(fs::path(o.out) / "prediction.json", j);
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_run(const Options& o, bool out_given) {
    ExperimentConfig c = config_for(o);
    if (out_given) c.output_dir = o.out;
    const ExperimentReport r = run_experiment(c);
    return verify(r.to_json(), std::cout);
}

int cmd_verify(const Options& o) {
    const fs::path p = o.report.empty() ? fs::path(o.out) / "report.json" : fs::path(o.report);
    std::ifstream in(p);
    if (!in) throw ValidationError("cannot read report " + p.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed report: ") + e.what());
    }
    return verify(j, std::cout);
}

int cmd_oracle(const Options& o) {
    const CircleOracle oracle =
        circle_oracle(o.log_kernel ? 0.0 : o.theta, o.n_max, o.log_kernel ? OracleKernel::log : OracleKernel::riesz);
    std::cout << to_json(oracle).dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectra of weighted singular integral operators on singular measures"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub, bool config, bool resolution) {
        if (config) sub->add_option("--config", o.config, "experiment config (JSON)");
        if (resolution) sub->add_option("--resolution", o.resolution, "resolution level (atoms, cells or depth)");
        return sub->add_option("--out", o.out, "working directory");
    };

    auto* measure = app.add_subcommand("measure", "build the measure and its class report");
    add_common(measure, true, true);
    auto* assemble = app.add_subcommand("assemble", "assemble the operator matrix");
    add_common(assemble, true, true);
    auto* spectrum = app.add_subcommand("spectrum", "decompose matrix.bin");
    add_common(spectrum, false, false);
    auto* fit = app.add_subcommand("fit", "fit a power law to spectrum.csv");
    add_common(fit, true, false);
    auto* predict = app.add_subcommand("predict", "Weyl prediction for the configured experiment");
    add_common(predict, true, true);
    predict->add_option("--normalization", o.normalization, "canonical|paper");
    auto* run = app.add_subcommand("run", "run the full pipeline");
    auto* run_out = add_common(run, true, false);
    run->add_option("--normalization", o.normalization, "canonical|paper");
    auto* verify_cmd = app.add_subcommand("verify", "check the verdicts of a report");
    add_common(verify_cmd, false, false);
    verify_cmd->add_option("report", o.report, "report.json (default: <out>/report.json)");
    auto* oracle = app.add_subcommand("oracle", "Fourier coefficients of the chordal kernel on the unit circle");
    oracle->add_option("--theta", o.theta, "singularity exponent in [0, 1)");
    oracle->add_option("--n-max", o.n_max, "largest frequency");
    oracle->add_flag("--log", o.log_kernel, "use -log|X - Y| instead");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*measure) return cmd_measure(o);
        if (*assemble) return cmd_assemble(o);
        if (*spectrum) return cmd_spectrum(o);
        if (*fit) return cmd_fit(o);
        if (*predict) return cmd_predict(o);
        if (*run) return cmd_run(o, run_out->count() > 0);
        if (*verify_cmd) return cmd_verify(o);
        if (*oracle) return cmd_oracle(o);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
