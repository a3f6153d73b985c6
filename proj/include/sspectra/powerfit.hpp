#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sspectra/spectra.hpp"

namespace sspectra {

/// 1-based inclusive index range into the sorted values of one sign.
struct FitWindow {
    std::size_t lo = 0, hi = 0;
};

/// n(lambda) ~ A_hat lambda^-p_hat, fitted as s_n ~ C n^slope with slope = -1/p_hat, A_hat = C^p_hat.
struct PowerFitResult {
    double p_hat = 0.0;
    double A_hat = 0.0;
    double slope = 0.0;
    double log_C = 0.0;
    FitWindow window;
    double rms_residual = 0.0;
    Sign sign = Sign::abs;
    /// Matrix dimension the fit was taken from.
    std::size_t matrix_size = 0;
};

/// [max(8, floor(0.005 M)), floor(0.1 M)]
FitWindow default_window(std::size_t matrix_size);

/// Values of the requested sign as a positive, descending sequence.
std::vector<double> signed_values(const Spectrum& s, Sign sign);

PowerFitResult fit_power_law(const std::vector<double>& values, const FitWindow& window, Sign sign = Sign::abs);
PowerFitResult fit_power_law(const Spectrum& s, Sign sign, std::optional<FitWindow> window = std::nullopt);

struct Extrapolation {
    PowerFitResult fit;
    std::vector<PowerFitResult> levels;
};

/// Least-squares line of p_hat and log A_hat against 1/M, evaluated at 1/M = 0.
Extrapolation extrapolate(const std::vector<PowerFitResult>& fits);

nlohmann::json to_json(const FitWindow& w);
nlohmann::json to_json(const PowerFitResult& r);
nlohmann::json to_json(const Extrapolation& e);

}  // namespace sspectra
