#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sspectra/assembly.hpp"
#include "sspectra/kernels.hpp"
#include "sspectra/measures.hpp"
#include "sspectra/powerfit.hpp"
#include "sspectra/spectra.hpp"
#include "sspectra/weyl.hpp"

namespace sspectra {

/// Experiment description. Loaded from JSON; see README for the schema.
struct ExperimentConfig {
    std::string name = "experiment";
    nlohmann::json measure;
    std::vector<std::size_t> resolutions;
    nlohmann::json kernel;
    nlohmann::json weights = {{"type", "constant"}, {"value", 1.0}};
    DiagonalRule diagonal_rule = DiagonalRule::ball_average;
    Sign sign = Sign::plus;
    std::optional<FitWindow> window;
    /// "finest" or "extrapolated"
    std::string exponent_source = "finest";
    Normalization normalization = Normalization::canonical;
    double exponent_rel = 0.05;
    /// Empty: coefficient not checked.
    std::optional<double> coefficient_rel;
    /// Explicit predicted exponent; otherwise sigma_W (surfaces) or the canonical table at alpha_hat.
    std::optional<double> predicted_exponent;
    std::filesystem::path output_dir = "sspectra_out";
    nlohmann::json source;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& c);

SingularMeasure build_measure(const ExperimentConfig& c, std::size_t resolution);
KernelSpec build_kernel(const nlohmann::json& j);
WeightField build_weights(const ExperimentConfig& c, const SingularMeasure& m);

OperatorMatrix assemble_stage(const ExperimentConfig& c, const SingularMeasure& m);
Spectrum spectrum_stage(const OperatorMatrix& a);
PowerFitResult fit_stage(const ExperimentConfig& c, const Spectrum& s);

struct Prediction {
    double exponent = 0.0;
    /// Coefficient for the fitted sign under the configured normalization.
    std::optional<double> coefficient;
    std::optional<WeylPrediction> weyl;
    std::optional<double> alpha_used;
    nlohmann::json to_json() const;
};

Prediction predict_stage(const ExperimentConfig& c, const SingularMeasure& m,
                         const std::optional<MeasureClassReport>& report = std::nullopt);

struct LevelResult {
    std::size_t resolution = 0;
    std::size_t matrix_size = 0;
    std::string measure_hash, matrix_hash;
    double spectrum_residual = 0.0;
    PowerFitResult fit;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::string config_hash;
    MeasureClassReport class_report;
    std::vector<LevelResult> levels;
    std::optional<Extrapolation> extrapolated;
    Prediction prediction;
    double p_used = 0.0;
    std::optional<double> A_used;
    bool exponent_pass = false;
    std::optional<bool> coefficient_pass;
    std::map<std::string, double> timings;

    /// Deterministic body plus a "timings" block.
    nlohmann::json to_json() const;
};

/// Runs every resolution and writes measure.json, matrix.bin, spectrum.csv per level
/// and report.json under the output directory.
ExperimentReport run_experiment(const ExperimentConfig& c);

/// Prints one line per verdict; 0 when every applicable verdict passes, 1 otherwise.
/// Throws ValidationError on a malformed report.
int verify(const nlohmann::json& report, std::ostream& out, std::optional<double> exponent_rel = std::nullopt,
           std::optional<double> coefficient_rel = std::nullopt);

/// Strips the timings block.
nlohmann::json deterministic_part(const nlohmann::json& report);

}  // namespace sspectra
