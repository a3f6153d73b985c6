#include "sspectra/powerfit.hpp"

#include <algorithm>
#include <cmath>

#include "sspectra/error.hpp"

namespace sspectra {

namespace {

constexpr std::size_t kMinFitValues = 16;

struct Line {
    double slope, intercept, rms;
};

// Centred least squares; exact data give an exact line.
Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    Line l{};
    l.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    l.intercept = my - l.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - (l.intercept + l.slope * x[i]);
        ss += r * r;
    }
    l.rms = std::sqrt(ss / n);
    return l;
}

}  // namespace

FitWindow default_window(std::size_t matrix_size) {
    const auto m = static_cast<double>(matrix_size);
    return {std::max<std::size_t>(8, static_cast<std::size_t>(std::floor(0.005 * m))),
            static_cast<std::size_t>(std::floor(0.1 * m))};
}

std::vector<double> signed_values(const Spectrum& s, Sign sign) {
    std::vector<double> out;
    for (double v : s.values) {
        double x = sign == Sign::plus ? v : sign == Sign::minus ? -v : std::abs(v);
        if (sign == Sign::abs || x > 0.0) out.push_back(x);
    }
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

PowerFitResult fit_power_law(const std::vector<double>& values, const FitWindow& window, Sign sign) {
    require(window.lo >= 1 && window.hi >= window.lo, "fit_power_law: invalid window");
    if (window.hi > values.size() || window.hi - window.lo + 1 < kMinFitValues)
        throw ValidationError("fit_power_law: fewer than 16 values in window [" + std::to_string(window.lo) + ", " +
                              std::to_string(window.hi) + "] (" + std::to_string(values.size()) + " available)");
    std::vector<double> x, y;
    for (std::size_t n = window.lo; n <= window.hi; ++n) {
        const double v = values[n - 1];
        if (!(v > 0.0)) throw ValidationError("fit_power_law: non-positive value in window");
        x.push_back(std::log(static_cast<double>(n)));
        y.push_back(std::log(v));
    }
    const Line line = least_squares(x, y);
    if (!(line.slope < 0.0)) throw NumericalError("fit_power_law: non-decreasing sequence, no power-law decay");
    PowerFitResult r;
    r.slope = line.slope;
    r.p_hat = -1.0 / line.slope;
    r.log_C = line.intercept;
    r.A_hat = std::exp(r.p_hat * line.intercept);
    r.window = window;
    r.rms_residual = line.rms;
    r.sign = sign;
    r.matrix_size = values.size();
    return r;
}

PowerFitResult fit_power_law(const Spectrum& s, Sign sign, std::optional<FitWindow> window) {
    const std::vector<double> v = signed_values(s, sign);
    PowerFitResult r = fit_power_law(v, window.value_or(default_window(s.size())), sign);
    r.matrix_size = s.size();
    return r;
}

Extrapolation extrapolate(const std::vector<PowerFitResult>& fits) {
    if (fits.size() < 2) throw ValidationError("extrapolate: needs at least 2 resolution levels");
    std::vector<double> x, p, logA;
    for (const auto& f : fits) {
        require(f.matrix_size > 0, "extrapolate: fit without matrix size");
        x.push_back(1.0 / static_cast<double>(f.matrix_size));
        p.push_back(f.p_hat);
        logA.push_back(std::log(f.A_hat));
    }
    Extrapolation e;
    e.levels = fits;
    e.fit = fits.back();
    e.fit.p_hat = least_squares(x, p).intercept;
    e.fit.A_hat = std::exp(least_squares(x, logA).intercept);
    e.fit.slope = -1.0 / e.fit.p_hat;
    e.fit.log_C = std::log(e.fit.A_hat) / e.fit.p_hat;
    e.fit.matrix_size = 0;
    // constant input: keep the common values bit-exact
    if (std::all_of(fits.begin(), fits.end(), [&](const PowerFitResult& f) { return f.p_hat == fits[0].p_hat; }))
        e.fit.p_hat = fits[0].p_hat;
    if (std::all_of(fits.begin(), fits.end(), [&](const PowerFitResult& f) { return f.A_hat == fits[0].A_hat; }))
        e.fit.A_hat = fits[0].A_hat;
    return e;
}

nlohmann::json to_json(const FitWindow& w) { return nlohmann::json::array({w.lo, w.hi}); }

nlohmann::json to_json(const PowerFitResult& r) {
    return {{"p_hat", r.p_hat},
            {"A_hat", r.A_hat},
            {"slope", r.slope},
            {"window", to_json(r.window)},
            {"rms_residual", r.rms_residual},
            {"sign", to_string(r.sign)},
            {"matrix_size", r.matrix_size}};
}

nlohmann::json to_json(const Extrapolation& e) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& f : e.levels) levels.push_back(to_json(f));
    return {{"p_hat", e.fit.p_hat},
            {"A_hat", e.fit.A_hat},
            {"model", "linear in 1/M"},
            {"heuristic", true},
            {"levels", levels}};
}

}  // namespace sspectra
