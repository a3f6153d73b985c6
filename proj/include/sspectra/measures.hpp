#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace sspectra {

using Point = std::span<const double>;

enum class MeasureKind { circle, lipschitz_graph, cantor_ifs, lebesgue_cube };

std::string to_string(MeasureKind kind);
MeasureKind measure_kind_from_string(const std::string& name);

/// Discrete atom-cloud approximation of a compactly supported singular measure.
///
/// Atoms are stored column-wise in `points` (ambient_dim x size). Surface kinds
/// carry per-atom orthonormal tangent frames (ambient_dim x intrinsic_dim).
struct SingularMeasure {
    int ambient_dim = 0;
    MeasureKind kind = MeasureKind::circle;
    Eigen::MatrixXd points;
    Eigen::VectorXd weights;
    std::optional<int> intrinsic_dim;
    std::optional<int> codim;
    double resolution = 0.0;
    std::vector<Eigen::MatrixXd> tangent_frames;
    /// Closed-form mass of the continuous construction, when one exists.
    std::optional<double> analytic_mass;
    /// Similarity dimension of Cantor constructions.
    std::optional<double> alpha_nominal;
    double diameter = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(weights.size()); }
    Point point(std::size_t i) const {
        return {points.col(static_cast<Eigen::Index>(i)).data(), static_cast<std::size_t>(ambient_dim)};
    }
    double total_mass() const;
    bool is_surface() const { return !tangent_frames.empty(); }
};

inline constexpr std::size_t kMaxAtoms = 1'000'000;

SingularMeasure make_circle(std::size_t n_atoms, double radius);

/// Cell-centred uniform grid in R^d (d = 1 or 2) given by per-axis centre coordinates.
struct GridAxes {
    std::vector<std::vector<double>> centers;

    static GridAxes uniform(std::span<const double> lower, std::span<const double> upper,
                            std::span<const std::size_t> cells);
    std::size_t dim() const { return centers.size(); }
    std::size_t cell_count() const;
    /// Coordinates of flat cell index `i` (row-major, last axis fastest).
    std::vector<double> cell_center(std::size_t i) const;
};

/// Graph measure of y = phi(x). `phi` is codim x cell_count, columns ordered row-major
/// over the grid. Rejects non-uniform spacing and slopes above `lipschitz_bound`.
SingularMeasure make_lipschitz_graph(const GridAxes& grid, const Eigen::MatrixXd& phi,
                                     double lipschitz_bound = 100.0);

/// Convenience overload tabulating phi at the cell centres.
SingularMeasure make_lipschitz_graph(const GridAxes& grid, int codim,
                                     const std::function<Eigen::VectorXd(Point)>& phi,
                                     double lipschitz_bound = 100.0);

SingularMeasure make_cantor(int depth, double contraction, int product_dims, int ambient_dim);

SingularMeasure make_lebesgue_cube(std::size_t n_per_side, int ambient_dim);

double cloud_diameter(const Eigen::MatrixXd& points);

enum class MeasureClass { P_plus, P_minus, P_two_sided, none };
std::string to_string(MeasureClass c);

struct RadiusRow {
    double radius = 0.0;
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    double mean_ratio = 0.0;
};

struct MeasureClassReport {
    double alpha_hat = 0.0;
    /// Exponent the ratios and verdict refer to (alpha_test, or alpha_hat when auto).
    double alpha_tested = 0.0;
    double A_hat = 0.0;
    double B_hat = 0.0;
    std::vector<RadiusRow> per_radius;
    MeasureClass verdict = MeasureClass::none;
    bool upper_holds = false;
    bool lower_holds = false;
    std::size_t centers_used = 0;
};

struct ClassReportOptions {
    std::optional<double> alpha_test;
    std::size_t n_centers = 64;
    std::size_t n_radii = 12;
    /// Skip (centre, radius) pairs whose ball leaves the bounding box of the atoms, in both the
    /// dimension slope and the ratio rows. Centres with fewer than two interior radii are dropped.
    bool interior_only = false;
    /// Allowed log-log drift of the extreme ratios before a bound is declared broken.
    double drift_tolerance = 0.05;
};

MeasureClassReport measure_class_report(const SingularMeasure& m, const ClassReportOptions& options = {});

/// Radii of the dyadic ladder diam * 2^-k, k >= 1, kept while >= 4h.
std::vector<double> dyadic_radii(const SingularMeasure& m, std::size_t n_radii);

/// Ball masses mu(B(X_c, r)) (open balls) for one centre over increasing or decreasing radii.
std::vector<double> ball_masses(const SingularMeasure& m, std::size_t center, std::span<const double> radii);

nlohmann::json to_json(const SingularMeasure& m);
SingularMeasure measure_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MeasureClassReport& r);

void save_measure(const std::filesystem::path& path, const SingularMeasure& m);
SingularMeasure load_measure(const std::filesystem::path& path);

std::string fingerprint(const SingularMeasure& m);

}  // namespace sspectra
