#include "sspectra/runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>

#include "sspectra/error.hpp"
#include "sspectra/hash.hpp"

namespace sspectra {

namespace fs = std::filesystem;

namespace {

using json = nlohmann::json;

// Re-throws module errors with the stage name prefixed.
template <class Fn>
auto staged(const char* stage, Fn&& fn) {
    try {
        return fn();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("[") + stage + "] " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("[") + stage + "] " + e.what());
    } catch (const json::exception& e) {
        throw ValidationError(std::string("[") + stage + "] malformed JSON: " + e.what());
    }
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::vector<double> json_doubles(const json& j, const char* key, std::vector<double> fallback) {
    return j.contains(key) ? j.at(key).get<std::vector<double>>() : std::move(fallback);
}

cplx json_complex(const json& j, double fallback) {
    if (j.contains("value")) return {j.at("value").get<double>(), 0.0};
    if (j.contains("re")) return {j.at("re").get<double>(), j.value("im", 0.0)};
    return {fallback, 0.0};
}

std::string matrix_hash(const OperatorMatrix& a) {
    Fnv1a h;
    h.update_pod(std::span<const cplx>(a.entries.data(), static_cast<std::size_t>(a.entries.size())));
    return h.hex();
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

double coefficient_for_sign(const WeylPrediction& w, Sign sign, Normalization n) {
    const bool paper = n == Normalization::paper;
    const double plus = paper ? w.A_plus_paper : w.A_plus_canonical;
    const double minus = paper ? w.A_minus_paper : w.A_minus_canonical;
    switch (sign) {
        case Sign::plus: return plus;
        case Sign::minus: return minus;
        case Sign::abs: return plus + minus;
    }
    return plus;
}

std::optional<double> optional_double(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    return staged("config", [&] {
        ExperimentConfig c;
        c.source = j;
        c.name = j.value("name", std::string("experiment"));
        c.measure = j.at("measure");
        c.resolutions = c.measure.at("resolutions").get<std::vector<std::size_t>>();
        require(!c.resolutions.empty(), "at least one resolution is required");
        for (std::size_t i = 1; i < c.resolutions.size(); ++i)
            require(c.resolutions[i] > c.resolutions[i - 1], "resolutions must be strictly increasing");
        c.kernel = j.at("kernel");
        if (j.contains("weights")) c.weights = j.at("weights");
        c.diagonal_rule = diagonal_rule_from_string(j.value("diagonal_rule", std::string("ball_average")));
        const json fit = j.value("fit", json::object());
        c.sign = sign_from_string(fit.value("sign", std::string("+")));
        if (fit.contains("window") && !fit.at("window").is_null()) {
            auto w = fit.at("window").get<std::vector<std::size_t>>();
            require(w.size() == 2, "fit.window must be [lo, hi]");
            c.window = FitWindow{w[0], w[1]};
        }
        c.exponent_source = fit.value("exponent_source", std::string("finest"));
        require(c.exponent_source == "finest" || c.exponent_source == "extrapolated",
                "fit.exponent_source must be finest or extrapolated");
        c.normalization = normalization_from_string(j.value("normalization", std::string("canonical")));
        const json tol = j.value("tolerances", json::object());
        c.exponent_rel = tol.value("exponent_rel", 0.05);
        c.coefficient_rel = optional_double(tol, "coefficient_rel");
        require(c.exponent_rel > 0.0 && c.exponent_rel < 1.0, "tolerances must lie in (0, 1)");
        if (c.coefficient_rel) require(*c.coefficient_rel > 0.0 && *c.coefficient_rel < 1.0, "tolerances must lie in (0, 1)");
        if (j.contains("prediction")) c.predicted_exponent = optional_double(j.at("prediction"), "exponent");
        c.output_dir = j.value("output_dir", std::string("sspectra_out"));
        return c;
    });
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("malformed config JSON: " + std::string(e.what()));
    }
    return config_from_json(j);
}

json to_json(const ExperimentConfig& c) {
    json fit = {{"sign", to_string(c.sign)}, {"exponent_source", c.exponent_source}};
    fit["window"] = c.window ? json::array({c.window->lo, c.window->hi}) : json(nullptr);
    json tol = {{"exponent_rel", c.exponent_rel}};
    tol["coefficient_rel"] = c.coefficient_rel ? json(*c.coefficient_rel) : json(nullptr);
    json pred = json::object();
    pred["exponent"] = c.predicted_exponent ? json(*c.predicted_exponent) : json(nullptr);
    return {{"name", c.name},
            {"measure", c.measure},
            {"kernel", c.kernel},
            {"weights", c.weights},
            {"diagonal_rule", to_string(c.diagonal_rule)},
            {"fit", fit},
            {"normalization", to_string(c.normalization)},
            {"tolerances", tol},
            {"prediction", pred},
            {"output_dir", c.output_dir.string()}};
}

SingularMeasure build_measure(const ExperimentConfig& c, std::size_t resolution) {
    return staged("measure", [&] {
        const json& j = c.measure;
        const MeasureKind kind = measure_kind_from_string(j.at("kind").get<std::string>());
        switch (kind) {
            case MeasureKind::circle: return make_circle(resolution, j.value("radius", 1.0));
            case MeasureKind::cantor_ifs:
                return make_cantor(static_cast<int>(resolution), j.value("contraction", 1.0 / 3.0), j.value("product_dims", 1),
                                   j.value("ambient_dim", j.value("product_dims", 1)));
            case MeasureKind::lebesgue_cube: return make_lebesgue_cube(resolution, j.value("ambient_dim", 1));
            case MeasureKind::lipschitz_graph: {
                const auto lower = json_doubles(j, "lower", {0.0});
                const auto upper = json_doubles(j, "upper", std::vector<double>(lower.size(), 1.0));
                require(lower.size() == upper.size(), "lower and upper must have equal length");
                std::vector<std::size_t> cells(lower.size(), resolution);
                const auto grid = GridAxes::uniform(lower, upper, cells);
                const std::string profile = j.value("profile", std::string("tent"));
                const double amp = j.value("amplitude", 1.0);
                const double centre = j.value("center", 0.5);
                std::function<Eigen::VectorXd(Point)> phi;
                if (profile == "tent")
                    phi = [=](Point x) { return Eigen::VectorXd::Constant(1, amp * std::abs(x[0] - centre)); };
                else if (profile == "flat")
                    phi = [](Point) { return Eigen::VectorXd::Zero(1); };
                else if (profile == "paraboloid")
                    phi = [=](Point x) {
                        double s = 0.0;
                        for (double v : x) s += (v - centre) * (v - centre);
                        return Eigen::VectorXd::Constant(1, amp * s);
                    };
                else
                    throw ValidationError("unknown graph profile: " + profile);
                return make_lipschitz_graph(grid, 1, phi);
            }
        }
        throw ValidationError("unknown measure kind");
    });
}

KernelSpec build_kernel(const json& j) {
    return staged("kernel", [&] {
        if (j.contains("terms")) return KernelSpec::from_json(j);
        const std::string type = j.at("type").get<std::string>();
        const int N = j.at("N").get<int>();
        const cplx amp = json_complex(j.value("amplitude", json::object()), 1.0);
        KernelSpec k = type == "riesz"  ? riesz_kernel(N, j.at("theta").get<double>(), Coefficient::constant(amp))
                       : type == "log" ? log_kernel(N, Coefficient::constant(j.value("Q", 1.0)))
                                       : throw ValidationError("unknown kernel type: " + type);
        for (const auto& t : j.value("lower_order", json::array())) {
            const cplx a = json_complex(t.value("amplitude", json::object()), 1.0);
            k = add_lower_order(k, KernelTerm::riesz(t.at("degree").get<double>(), Coefficient::constant(a)));
        }
        if (j.contains("multiplier")) {
            const json& m = j.at("multiplier");
            MultiplierSpec phi{Coefficient::exp_dot(m.at("scale").get<double>(), k.matrix_size()),
                               m.value("declared_smoothness", -1)};
            const std::string right = m.value("right", std::string("same"));
            if (right == "same") k = apply_multiplier(k, phi, std::nullopt, true);
            else if (right == "none") k = apply_multiplier(k, phi);
            else throw ValidationError("multiplier.right must be same or none");
        }
        return k;
    });
}

WeightField build_weights(const ExperimentConfig& c, const SingularMeasure& m) {
    return staged("weights", [&] {
        const json& j = c.weights;
        const std::string type = j.value("type", std::string("constant"));
        const std::size_t k = c.kernel.value("k", std::size_t{1});
        WeightField scalar;
        if (type == "constant") {
            scalar = WeightField::constant(m.size(), json_complex(j, 1.0), "constant");
        } else if (type == "exp_norm2") {
            const double s = j.at("scale").get<double>();
            scalar = WeightField::from_function(
                m,
                [s](Point x) {
                    double r2 = 0.0;
                    for (double v : x) r2 += v * v;
                    return cplx(std::exp(s * r2), 0.0);
                },
                "exp_norm2");
        } else if (type == "affine") {
            const double a = j.value("a", 1.0), b = j.value("b", 0.0);
            const auto axis = j.value("axis", std::size_t{0});
            require(axis < static_cast<std::size_t>(m.ambient_dim), "affine weight axis out of range");
            scalar = WeightField::from_function(m, [=](Point x) { return cplx(a + b * x[axis], 0.0); }, "affine");
        } else if (type == "file") {
            std::ifstream in(j.at("path").get<std::string>());
            if (!in) throw ValidationError("cannot read weight file " + j.at("path").get<std::string>());
            json values;
            in >> values;
            require(values.size() == m.size(), "weight file must hold one value per atom");
            std::vector<cplx> v;
            for (const auto& x : values)
                v.push_back(x.is_array() ? cplx(x.at(0).get<double>(), x.at(1).get<double>()) : cplx(x.get<double>(), 0.0));
            scalar = WeightField(m.size(), 1, std::move(v), "file");
        } else {
            throw ValidationError("unknown weight type: " + type);
        }
        if (k == 1) return scalar;
        return WeightField::identity(m.size(), k).times(scalar);
    });
}

OperatorMatrix assemble_stage(const ExperimentConfig& c, const SingularMeasure& m) {
    const KernelSpec kernel = build_kernel(c.kernel);
    const WeightField F = build_weights(c, m);
    return staged("assemble", [&] { return assemble(m, kernel, F, F.adjoint(), c.diagonal_rule); });
}

Spectrum spectrum_stage(const OperatorMatrix& a) {
    return staged("spectrum", [&] { return a.hermitian ? hermitian_eigen(a) : singular_values(a); });
}

PowerFitResult fit_stage(const ExperimentConfig& c, const Spectrum& s) {
    return staged("fit", [&] {
        const Sign sign = s.kind == SpectrumKind::singular_values ? Sign::abs : c.sign;
        return fit_power_law(s, sign, c.window);
    });
}

json Prediction::to_json() const {
    json j = {{"exponent", exponent}};
    j["coefficient"] = coefficient ? json(*coefficient) : json(nullptr);
    j["alpha_used"] = alpha_used ? json(*alpha_used) : json(nullptr);
    j["weyl"] = weyl ? sspectra::to_json(*weyl) : json(nullptr);
    return j;
}

Prediction predict_stage(const ExperimentConfig& c, const SingularMeasure& m, const std::optional<MeasureClassReport>& report) {
    const KernelSpec kernel = build_kernel(c.kernel);
    const WeightField F = build_weights(c, m);
    return staged("predict", [&] {
        Prediction p;
        if (m.is_surface()) {
            WeylPrediction w = weyl_coefficient(m, kernel, F, c.normalization);
            const bool unit_circle = m.kind == MeasureKind::circle && c.measure.value("radius", 1.0) == 1.0;
            if (unit_circle && kernel.matrix_size() == 1) {
                const auto& lead = kernel.leading();
                if (lead.form == TermForm::log) {
                    w.oracle_theta = 0.0;
                    w.oracle_c_inf = circle_oracle(0.0, 0, OracleKernel::log).c_inf;
                } else if (lead.form == TermForm::riesz && kernel.theta() < 1.0) {
                    w.oracle_theta = kernel.theta();
                    w.oracle_c_inf = circle_oracle(kernel.theta(), 0).c_inf;
                }
            }
            p.exponent = w.sigma_w;
            p.coefficient = coefficient_for_sign(w, c.sign, c.normalization);
            p.weyl = std::move(w);
        } else {
            const MeasureClassReport r = report ? *report : measure_class_report(m);
            const double l = m.ambient_dim - std::max(0.0, kernel.theta());
            const auto table = exponent_table<double>(m.ambient_dim, r.alpha_hat, l, l / 2.0);
            if (!table.canonical.admissible) throw ValidationError("l <= N - alpha: no admissible exponent");
            p.exponent = table.canonical.p;
            p.alpha_used = r.alpha_hat;
        }
        if (c.predicted_exponent) p.exponent = *c.predicted_exponent;
        return p;
    });
}

json ExperimentReport::to_json() const {
    json levels_json = json::array();
    for (const auto& l : levels) {
        const std::string dir = "M" + std::to_string(l.resolution);
        levels_json.push_back({{"resolution", l.resolution},
                               {"matrix_size", l.matrix_size},
                               {"measure_hash", l.measure_hash},
                               {"matrix_hash", l.matrix_hash},
                               {"spectrum_residual", l.spectrum_residual},
                               {"files",
                                {{"measure", dir + "/measure.json"},
                                 {"matrix", dir + "/matrix.bin"},
                                 {"spectrum", dir + "/spectrum.csv"}}},
                               {"fit", sspectra::to_json(l.fit)}});
    }
    json exponent = {{"p_hat", p_used},
                     {"p_pred", prediction.exponent},
                     {"source", config.exponent_source},
                     {"rel_error", std::abs(p_used - prediction.exponent) / prediction.exponent},
                     {"tolerance", config.exponent_rel},
                     {"pass", exponent_pass}};
    json coefficient = nullptr;
    if (coefficient_pass && A_used && prediction.coefficient) {
        coefficient = {{"A_hat", *A_used},
                       {"A_pred", *prediction.coefficient},
                       {"normalization", to_string(config.normalization)},
                       {"rel_error", std::abs(*A_used - *prediction.coefficient) / *prediction.coefficient},
                       {"tolerance", *config.coefficient_rel},
                       {"pass", *coefficient_pass}};
        if (prediction.weyl) {
            const auto& w = *prediction.weyl;
            const double canonical = coefficient_for_sign(w, config.sign, Normalization::canonical);
            const double paper = coefficient_for_sign(w, config.sign, Normalization::paper);
            coefficient["A_pred_canonical"] = canonical;
            coefficient["A_pred_paper"] = paper;
            coefficient["paper_over_canonical"] = canonical > 0.0 ? paper / canonical : 0.0;
            coefficient["A_hat_over_paper"] = paper > 0.0 ? *A_used / paper : 0.0;
        }
    }
    json j = {{"name", config.name},
              {"config", sspectra::to_json(config)},
              {"config_hash", config_hash},
              {"measure_class", sspectra::to_json(class_report)},
              {"levels", levels_json},
              {"prediction", prediction.to_json()},
              {"verdicts", {{"exponent", exponent}, {"coefficient", coefficient}}}};
    j["extrapolated"] = extrapolated ? sspectra::to_json(*extrapolated) : json(nullptr);
    j["timings"] = timings;
    return j;
}

ExperimentReport run_experiment(const ExperimentConfig& c) {
    ExperimentReport r;
    r.config = c;
    {
        Fnv1a h;
        h.update(to_json(c).dump());
        r.config_hash = h.hex();
    }
    Stopwatch total;
    fs::create_directories(c.output_dir);

    // validate kernel and prediction preconditions before any heavy work
    const SingularMeasure coarse = build_measure(c, c.resolutions.front());
    std::optional<MeasureClassReport> coarse_report;
    if (!coarse.is_surface()) coarse_report = staged("measure", [&] { return measure_class_report(coarse); });
    (void)predict_stage(c, coarse, coarse_report);

    SingularMeasure finest;
    for (std::size_t res : c.resolutions) {
        const std::string tag = "M" + std::to_string(res);
        const fs::path dir = c.output_dir / tag;
        fs::create_directories(dir);
        LevelResult level;
        level.resolution = res;

        Stopwatch sw;
        SingularMeasure m = build_measure(c, res);
        save_measure(dir / "measure.json", m);
        level.measure_hash = fingerprint(m);
        r.timings[tag + ".measure"] = sw.seconds();

        Stopwatch sa;
        OperatorMatrix a = assemble_stage(c, m);
        write_matrix(dir / "matrix.bin", a);
        level.matrix_hash = matrix_hash(a);
        level.matrix_size = a.dim();
        r.timings[tag + ".assemble"] = sa.seconds();

        Stopwatch ss;
        Spectrum s = spectrum_stage(a);
        write_spectrum_csv(dir / "spectrum.csv", s);
        level.spectrum_residual = s.residual;
        r.timings[tag + ".spectrum"] = ss.seconds();

        level.fit = fit_stage(c, s);
        write_json(dir / "fit.json", to_json(level.fit));
        r.levels.push_back(level);
        finest = std::move(m);
    }

    Stopwatch sp;
    r.class_report = staged("measure", [&] { return measure_class_report(finest); });
    r.prediction = predict_stage(c, finest, r.class_report);
    r.timings["predict"] = sp.seconds();

    std::vector<PowerFitResult> fits;
    for (const auto& l : r.levels) fits.push_back(l.fit);
    if (fits.size() >= 2) r.extrapolated = staged("fit", [&] { return extrapolate(fits); });

    const PowerFitResult& fine = r.levels.back().fit;
    if (c.exponent_source == "extrapolated" && !r.extrapolated)
        throw ValidationError("[fit] exponent_source extrapolated needs at least 2 resolutions");
    r.p_used = c.exponent_source == "extrapolated" ? r.extrapolated->fit.p_hat : fine.p_hat;
    r.exponent_pass = std::abs(r.p_used - r.prediction.exponent) / r.prediction.exponent <= c.exponent_rel;
    if (c.coefficient_rel && r.prediction.coefficient) {
        r.A_used = r.extrapolated ? r.extrapolated->fit.A_hat : fine.A_hat;
        r.coefficient_pass = std::abs(*r.A_used - *r.prediction.coefficient) / *r.prediction.coefficient <= *c.coefficient_rel;
    }
    r.timings["total"] = total.seconds();
    write_json(c.output_dir / "report.json", r.to_json());
    return r;
}

json deterministic_part(const json& report) {
    json j = report;
    j.erase("timings");
    return j;
}

int verify(const json& report, std::ostream& out, std::optional<double> exponent_rel, std::optional<double> coefficient_rel) {
    if (!report.is_object() || !report.contains("prediction") || report.at("prediction").is_null())
        throw ValidationError("malformed report: missing prediction section");
    if (!report.contains("verdicts") || !report.at("verdicts").contains("exponent"))
        throw ValidationError("malformed report: missing verdicts section");
    int status = 0;
    try {
        const json& e = report.at("verdicts").at("exponent");
        const double p_hat = e.at("p_hat").get<double>(), p_pred = e.at("p_pred").get<double>();
        const double tol = exponent_rel.value_or(e.at("tolerance").get<double>());
        const double rel = std::abs(p_hat - p_pred) / p_pred;
        const bool pass = rel <= tol;
        out << (pass ? "PASS" : "FAIL") << " exponent: p_hat=" << p_hat << " predicted=" << p_pred << " rel=" << rel
            << " tol=" << tol << '\n';
        if (!pass) status = 1;

        const json& cf = report.at("verdicts").at("coefficient");
        if (cf.is_null()) {
            out << "SKIP coefficient: not checked\n";
        } else {
            const double A_hat = cf.at("A_hat").get<double>(), A_pred = cf.at("A_pred").get<double>();
            const double ctol = coefficient_rel.value_or(cf.at("tolerance").get<double>());
            const double crel = std::abs(A_hat - A_pred) / A_pred;
            const bool cpass = crel <= ctol;
            out << (cpass ? "PASS" : "FAIL") << " coefficient: A_hat=" << A_hat << " predicted=" << A_pred
                << " rel=" << crel << " tol=" << ctol << '\n';
            if (!cpass) status = 1;
        }
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("malformed report: ") + ex.what());
    }
    return status;
}

}  // namespace sspectra
