#include "sspectra/measures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "sspectra/error.hpp"
#include "sspectra/hash.hpp"
#include "sspectra/parallel.hpp"

namespace sspectra {

namespace {

double kahan_sum(const Eigen::VectorXd& v) {
    double sum = 0.0, c = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double y = v[i] - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    return sum;
}

// Modified Gram-Schmidt on the columns of `a`.
Eigen::MatrixXd orthonormalize(Eigen::MatrixXd a) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        for (Eigen::Index i = 0; i < j; ++i) a.col(j) -= a.col(i).dot(a.col(j)) * a.col(i);
        a.col(j).normalize();
    }
    return a;
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace

std::string to_string(MeasureKind kind) {
    switch (kind) {
        case MeasureKind::circle: return "circle";
        case MeasureKind::lipschitz_graph: return "lipschitz_graph";
        case MeasureKind::cantor_ifs: return "cantor_ifs";
        case MeasureKind::lebesgue_cube: return "lebesgue_cube";
    }
    return "unknown";
}

MeasureKind measure_kind_from_string(const std::string& name) {
    if (name == "circle") return MeasureKind::circle;
    if (name == "lipschitz_graph") return MeasureKind::lipschitz_graph;
    if (name == "cantor_ifs" || name == "cantor") return MeasureKind::cantor_ifs;
    if (name == "lebesgue_cube") return MeasureKind::lebesgue_cube;
    throw ValidationError("unknown measure kind: " + name);
}

std::string to_string(MeasureClass c) {
    switch (c) {
        case MeasureClass::P_plus: return "P_plus";
        case MeasureClass::P_minus: return "P_minus";
        case MeasureClass::P_two_sided: return "P_two_sided";
        case MeasureClass::none: return "none";
    }
    return "none";
}

double SingularMeasure::total_mass() const { return kahan_sum(weights); }

double cloud_diameter(const Eigen::MatrixXd& points) {
    const Eigen::Index n = points.cols();
    if (n < 2) return 0.0;
    if (n > 16384) {
        // Bounding-box diagonal: an upper bound, exact enough for radius ladders.
        return (points.rowwise().maxCoeff() - points.rowwise().minCoeff()).norm();
    }
    double best = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) best = std::max(best, (points.col(i) - points.col(j)).squaredNorm());
    return std::sqrt(best);
}

SingularMeasure make_circle(std::size_t n_atoms, double radius) {
    require(n_atoms >= 2, "make_circle: n_atoms must be >= 2");
    require(radius > 0.0 && std::isfinite(radius), "make_circle: radius must be positive");
    require(n_atoms <= kMaxAtoms, "make_circle: too many atoms");

    SingularMeasure m;
    m.ambient_dim = 2;
    m.kind = MeasureKind::circle;
    m.intrinsic_dim = 1;
    m.codim = 1;
    const auto n = static_cast<Eigen::Index>(n_atoms);
    m.points.resize(2, n);
    m.weights = Eigen::VectorXd::Constant(n, 2.0 * std::numbers::pi * radius / static_cast<double>(n_atoms));
    m.tangent_frames.reserve(n_atoms);
    for (Eigen::Index i = 0; i < n; ++i) {
        double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_atoms);
        m.points(0, i) = radius * std::cos(angle);
        m.points(1, i) = radius * std::sin(angle);
        Eigen::MatrixXd frame(2, 1);
        frame << -std::sin(angle), std::cos(angle);
        m.tangent_frames.push_back(std::move(frame));
    }
    m.resolution = 2.0 * std::numbers::pi * radius / static_cast<double>(n_atoms);
    m.analytic_mass = 2.0 * std::numbers::pi * radius;
    m.diameter = cloud_diameter(m.points);
    return m;
}

GridAxes GridAxes::uniform(std::span<const double> lower, std::span<const double> upper,
                           std::span<const std::size_t> cells) {
    require(lower.size() == upper.size() && lower.size() == cells.size(), "GridAxes: dimension mismatch");
    GridAxes g;
    for (std::size_t a = 0; a < lower.size(); ++a) {
        require(upper[a] > lower[a] && cells[a] >= 1, "GridAxes: empty axis");
        double h = (upper[a] - lower[a]) / static_cast<double>(cells[a]);
        std::vector<double> c(cells[a]);
        for (std::size_t i = 0; i < cells[a]; ++i) c[i] = lower[a] + (static_cast<double>(i) + 0.5) * h;
        g.centers.push_back(std::move(c));
    }
    return g;
}

std::size_t GridAxes::cell_count() const {
    std::size_t n = 1;
    for (const auto& c : centers) n *= c.size();
    return n;
}

std::vector<double> GridAxes::cell_center(std::size_t i) const {
    std::vector<double> x(centers.size());
    for (std::size_t a = centers.size(); a-- > 0;) {
        x[a] = centers[a][i % centers[a].size()];
        i /= centers[a].size();
    }
    return x;
}

SingularMeasure make_lipschitz_graph(const GridAxes& grid, const Eigen::MatrixXd& phi, double lipschitz_bound) {
    const std::size_t d = grid.dim();
    require(d == 1 || d == 2, "make_lipschitz_graph: grid must be 1D or 2D");
    const std::size_t cells = grid.cell_count();
    require(cells <= kMaxAtoms, "make_lipschitz_graph: too many cells");
    require(static_cast<std::size_t>(phi.cols()) == cells, "make_lipschitz_graph: phi table size mismatch");
    require(phi.rows() >= 1, "make_lipschitz_graph: codimension must be >= 1");
    require(phi.allFinite(), "make_lipschitz_graph: phi must be finite");

    std::vector<double> spacing(d);
    std::vector<std::size_t> extent(d);
    for (std::size_t a = 0; a < d; ++a) {
        const auto& c = grid.centers[a];
        require(c.size() >= 2, "make_lipschitz_graph: need at least 2 cells per axis");
        double h = (c.back() - c.front()) / static_cast<double>(c.size() - 1);
        require(h > 0.0, "make_lipschitz_graph: axis must be increasing");
        for (std::size_t i = 1; i < c.size(); ++i)
            if (std::abs((c[i] - c[i - 1]) - h) > 1e-9 * h) throw ValidationError("make_lipschitz_graph: non-uniform grid");
        spacing[a] = h;
        extent[a] = c.size();
    }

    const int dF = static_cast<int>(phi.rows());
    const int N = static_cast<int>(d) + dF;
    std::vector<std::size_t> stride(d, 1);
    for (std::size_t a = d - 1; a > 0; --a) stride[a - 1] = stride[a] * extent[a];

    double cell_volume = 1.0;
    for (double h : spacing) cell_volume *= h;

    SingularMeasure m;
    m.ambient_dim = N;
    m.kind = MeasureKind::lipschitz_graph;
    m.intrinsic_dim = static_cast<int>(d);
    m.codim = dF;
    m.points.resize(N, static_cast<Eigen::Index>(cells));
    m.weights.resize(static_cast<Eigen::Index>(cells));
    m.tangent_frames.reserve(cells);

    double max_slope = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
        auto x = grid.cell_center(i);
        Eigen::MatrixXd jac(dF, static_cast<Eigen::Index>(d));
        for (std::size_t a = 0; a < d; ++a) {
            std::size_t coord = (i / stride[a]) % extent[a];
            std::size_t lo = coord == 0 ? i : i - stride[a];
            std::size_t hi = coord + 1 == extent[a] ? i : i + stride[a];
            double span_h = spacing[a] * static_cast<double>((hi == i ? 0 : 1) + (lo == i ? 0 : 1));
            jac.col(static_cast<Eigen::Index>(a)) =
                (phi.col(static_cast<Eigen::Index>(hi)) - phi.col(static_cast<Eigen::Index>(lo))) / span_h;
            if (coord + 1 < extent[a]) {
                double slope = (phi.col(static_cast<Eigen::Index>(i + stride[a])) - phi.col(static_cast<Eigen::Index>(i))).norm() /
                               spacing[a];
                max_slope = std::max(max_slope, slope);
            }
        }
        Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) +
                               jac.transpose() * jac;
        const auto col = static_cast<Eigen::Index>(i);
        m.weights[col] = cell_volume * std::sqrt(gram.determinant());
        for (std::size_t a = 0; a < d; ++a) m.points(static_cast<Eigen::Index>(a), col) = x[a];
        m.points.block(static_cast<Eigen::Index>(d), col, dF, 1) = phi.col(col);

        Eigen::MatrixXd lifted(N, static_cast<Eigen::Index>(d));
        lifted.topRows(static_cast<Eigen::Index>(d)).setIdentity();
        lifted.bottomRows(dF) = jac;
        m.tangent_frames.push_back(orthonormalize(std::move(lifted)));
    }
    if (max_slope > lipschitz_bound)
        throw ValidationError("make_lipschitz_graph: finite-difference slope " + std::to_string(max_slope) +
                              " exceeds Lipschitz bound " + std::to_string(lipschitz_bound));

    m.resolution = *std::max_element(spacing.begin(), spacing.end());
    m.diameter = cloud_diameter(m.points);
    return m;
}

SingularMeasure make_lipschitz_graph(const GridAxes& grid, int codim, const std::function<Eigen::VectorXd(Point)>& phi,
                                     double lipschitz_bound) {
    require(codim >= 1, "make_lipschitz_graph: codimension must be >= 1");
    const std::size_t cells = grid.cell_count();
    require(cells <= kMaxAtoms, "make_lipschitz_graph: too many cells");
    Eigen::MatrixXd table(codim, static_cast<Eigen::Index>(cells));
    for (std::size_t i = 0; i < cells; ++i) {
        auto x = grid.cell_center(i);
        Eigen::VectorXd y = phi(Point(x));
        require(y.size() == codim, "make_lipschitz_graph: phi returned wrong codimension");
        table.col(static_cast<Eigen::Index>(i)) = y;
    }
    return make_lipschitz_graph(grid, table, lipschitz_bound);
}

SingularMeasure make_cantor(int depth, double contraction, int product_dims, int ambient_dim) {
    require(depth >= 1, "make_cantor: depth must be >= 1");
    require(contraction > 0.0 && contraction < 0.5, "make_cantor: contraction must lie in (0, 1/2)");
    require(product_dims >= 1 && ambient_dim >= product_dims, "make_cantor: need 1 <= product_dims <= ambient_dim");
    const double log_atoms = static_cast<double>(depth) * product_dims * std::log(2.0);
    require(log_atoms <= std::log(static_cast<double>(kMaxAtoms)) + 1e-12, "make_cantor: depth exceeds the atom cap");

    // Level-k cell centres of the 1D IFS {x -> rho x, x -> rho x + 1 - rho}, ascending.
    const std::size_t per_axis = std::size_t{1} << depth;
    std::vector<double> centers(per_axis);
    const double side = std::pow(contraction, depth);
    for (std::size_t idx = 0; idx < per_axis; ++idx) {
        double left = 0.0, scale = 1.0;
        for (int level = 0; level < depth; ++level) {
            bool right = (idx >> (depth - 1 - level)) & 1U;
            if (right) left += scale * (1.0 - contraction);
            scale *= contraction;
        }
        centers[idx] = left + 0.5 * side;
    }

    std::size_t total = 1;
    for (int q = 0; q < product_dims; ++q) total *= per_axis;

    SingularMeasure m;
    m.ambient_dim = ambient_dim;
    m.kind = MeasureKind::cantor_ifs;
    m.points = Eigen::MatrixXd::Zero(ambient_dim, static_cast<Eigen::Index>(total));
    m.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(total), 1.0 / static_cast<double>(total));
    for (std::size_t i = 0; i < total; ++i) {
        std::size_t rest = i;
        for (int q = product_dims; q-- > 0;) {
            m.points(q, static_cast<Eigen::Index>(i)) = centers[rest % per_axis];
            rest /= per_axis;
        }
    }
    m.resolution = side;
    m.analytic_mass = 1.0;
    m.alpha_nominal = product_dims * std::log(2.0) / std::log(1.0 / contraction);
    m.diameter = cloud_diameter(m.points);
    return m;
}

SingularMeasure make_lebesgue_cube(std::size_t n_per_side, int ambient_dim) {
    require(n_per_side >= 1, "make_lebesgue_cube: n_per_side must be >= 1");
    require(ambient_dim >= 1, "make_lebesgue_cube: ambient_dim must be >= 1");
    double count = std::pow(static_cast<double>(n_per_side), ambient_dim);
    require(count <= static_cast<double>(kMaxAtoms), "make_lebesgue_cube: atom count exceeds the cap");
    const auto total = static_cast<std::size_t>(std::llround(count));

    SingularMeasure m;
    m.ambient_dim = ambient_dim;
    m.kind = MeasureKind::lebesgue_cube;
    m.intrinsic_dim = ambient_dim;
    m.codim = 0;
    m.points.resize(ambient_dim, static_cast<Eigen::Index>(total));
    m.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(total), 1.0 / count);
    const double h = 1.0 / static_cast<double>(n_per_side);
    m.tangent_frames.assign(total, Eigen::MatrixXd::Identity(ambient_dim, ambient_dim));
    for (std::size_t i = 0; i < total; ++i) {
        std::size_t rest = i;
        for (int a = ambient_dim; a-- > 0;) {
            m.points(a, static_cast<Eigen::Index>(i)) = (static_cast<double>(rest % n_per_side) + 0.5) * h;
            rest /= n_per_side;
        }
    }
    m.resolution = h;
    m.analytic_mass = 1.0;
    m.diameter = cloud_diameter(m.points);
    return m;
}

std::vector<double> dyadic_radii(const SingularMeasure& m, std::size_t n_radii) {
    std::vector<double> radii;
    const double floor = 4.0 * m.resolution;
    double r = m.diameter / 2.0;
    while (r >= floor && radii.size() < n_radii) {
        radii.push_back(r);
        r /= 2.0;
    }
    return radii;
}

std::vector<double> ball_masses(const SingularMeasure& m, std::size_t center, std::span<const double> radii) {
    const std::size_t n = m.size();
    std::vector<std::pair<double, std::size_t>> dist(n);
    const auto c = m.points.col(static_cast<Eigen::Index>(center));
    for (std::size_t j = 0; j < n; ++j) dist[j] = {(m.points.col(static_cast<Eigen::Index>(j)) - c).norm(), j};
    std::sort(dist.begin(), dist.end());
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) prefix[j + 1] = prefix[j] + m.weights[static_cast<Eigen::Index>(dist[j].second)];

    std::vector<double> out;
    out.reserve(radii.size());
    for (double r : radii) {
        // Open ball: count atoms with distance strictly below r.
        auto it = std::lower_bound(dist.begin(), dist.end(), std::pair<double, std::size_t>{r, 0});
        out.push_back(prefix[static_cast<std::size_t>(it - dist.begin())]);
    }
    return out;
}

MeasureClassReport measure_class_report(const SingularMeasure& m, const ClassReportOptions& options) {
    require(options.n_centers >= 1 && options.n_centers <= m.size(), "measure_class_report: n_centers must be in [1, atom count]");
    const auto radii = dyadic_radii(m, options.n_radii);
    if (radii.size() < 3) throw ValidationError("measure_class_report: insufficient resolution (fewer than 3 usable radii)");

    const std::size_t nc = options.n_centers;
    std::vector<std::size_t> centers(nc);
    for (std::size_t i = 0; i < nc; ++i) centers[i] = ((2 * i + 1) * m.size()) / (2 * nc);

    std::vector<std::vector<double>> masses(nc);
    parallel_for(nc, [&](std::size_t i) { masses[i] = ball_masses(m, centers[i], radii); });

    std::vector<double> log_r(radii.size());
    std::transform(radii.begin(), radii.end(), log_r.begin(), [](double r) { return std::log(r); });

    Eigen::VectorXd lo_box = m.points.rowwise().minCoeff(), hi_box = m.points.rowwise().maxCoeff();
    lo_box.array() -= 0.5 * m.resolution;
    hi_box.array() += 0.5 * m.resolution;
    // inside[i][k]: ball k around center i lies in the bounding box (always true unless interior_only)
    std::vector<std::vector<bool>> inside(nc, std::vector<bool>(radii.size(), true));
    if (options.interior_only)
        for (std::size_t i = 0; i < nc; ++i) {
            const auto c = m.points.col(static_cast<Eigen::Index>(centers[i]));
            for (std::size_t k = 0; k < radii.size(); ++k)
                inside[i][k] = ((c.array() - radii[k]) >= lo_box.array()).all() && ((c.array() + radii[k]) <= hi_box.array()).all();
        }

    MeasureClassReport report;
    report.centers_used = 0;
    double slope_sum = 0.0;
    for (std::size_t i = 0; i < nc; ++i) {
        std::vector<double> xs, ys;
        for (std::size_t k = 0; k < radii.size(); ++k)
            if (inside[i][k]) {
                xs.push_back(log_r[k]);
                ys.push_back(std::log(masses[i][k]));
            }
        if (xs.size() < 2) continue;
        slope_sum += least_squares_slope(xs, ys);
        ++report.centers_used;
    }
    if (report.centers_used == 0)
        throw ValidationError("measure_class_report: no center has two interior radii");
    report.alpha_hat = slope_sum / static_cast<double>(report.centers_used);
    const double alpha = options.alpha_test.value_or(report.alpha_hat);
    report.alpha_tested = alpha;

    report.A_hat = 0.0;
    report.B_hat = std::numeric_limits<double>::infinity();
    std::vector<double> fit_r, fit_max, fit_min;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        RadiusRow row{radii[k], std::numeric_limits<double>::infinity(), 0.0, 0.0};
        std::size_t used = 0;
        for (std::size_t i = 0; i < nc; ++i) {
            if (!inside[i][k]) continue;
            double ratio = masses[i][k] / std::pow(radii[k], alpha);
            row.min_ratio = std::min(row.min_ratio, ratio);
            row.max_ratio = std::max(row.max_ratio, ratio);
            row.mean_ratio += ratio;
            ++used;
        }
        if (used == 0) continue;
        row.mean_ratio /= static_cast<double>(used);
        report.A_hat = std::max(report.A_hat, row.max_ratio);
        report.B_hat = std::min(report.B_hat, row.min_ratio);
        fit_r.push_back(std::log(row.radius));
        fit_max.push_back(std::log(row.max_ratio));
        fit_min.push_back(std::log(row.min_ratio));
        report.per_radius.push_back(row);
    }
    if (report.per_radius.size() < 3) throw ValidationError("measure_class_report: insufficient resolution (fewer than 3 usable radii)");

    // Ratios drifting to infinity (resp. zero) as r -> 0 break the upper (resp. lower) bound.
    report.upper_holds = least_squares_slope(fit_r, fit_max) >= -options.drift_tolerance;
    report.lower_holds = least_squares_slope(fit_r, fit_min) <= options.drift_tolerance;
    if (report.upper_holds && report.lower_holds) report.verdict = MeasureClass::P_two_sided;
    else if (report.upper_holds) report.verdict = MeasureClass::P_plus;
    else if (report.lower_holds) report.verdict = MeasureClass::P_minus;
    return report;
}

nlohmann::json to_json(const SingularMeasure& m) {
    nlohmann::json j;
    j["ambient_dim"] = m.ambient_dim;
    j["kind"] = to_string(m.kind);
    j["d"] = m.intrinsic_dim ? nlohmann::json(*m.intrinsic_dim) : nlohmann::json(nullptr);
    j["dF"] = m.codim ? nlohmann::json(*m.codim) : nlohmann::json(nullptr);
    j["resolution"] = m.resolution;
    j["diameter"] = m.diameter;
    j["analytic_mass"] = m.analytic_mass ? nlohmann::json(*m.analytic_mass) : nlohmann::json(nullptr);
    j["alpha_nominal"] = m.alpha_nominal ? nlohmann::json(*m.alpha_nominal) : nlohmann::json(nullptr);
    auto atoms = nlohmann::json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        auto p = m.point(i);
        atoms.push_back({{"x", std::vector<double>(p.begin(), p.end())}, {"w", m.weights[static_cast<Eigen::Index>(i)]}});
    }
    j["atoms"] = std::move(atoms);
    auto frames = nlohmann::json::array();
    for (const auto& f : m.tangent_frames) {
        auto cols = nlohmann::json::array();
        for (Eigen::Index c = 0; c < f.cols(); ++c) cols.push_back(std::vector<double>(f.col(c).data(), f.col(c).data() + f.rows()));
        frames.push_back(std::move(cols));
    }
    j["tangent_frames"] = std::move(frames);
    return j;
}

SingularMeasure measure_from_json(const nlohmann::json& j) {
    try {
        SingularMeasure m;
        m.ambient_dim = j.at("ambient_dim").get<int>();
        m.kind = measure_kind_from_string(j.at("kind").get<std::string>());
        if (!j.at("d").is_null()) m.intrinsic_dim = j.at("d").get<int>();
        if (!j.at("dF").is_null()) m.codim = j.at("dF").get<int>();
        m.resolution = j.at("resolution").get<double>();
        if (j.contains("analytic_mass") && !j["analytic_mass"].is_null()) m.analytic_mass = j["analytic_mass"].get<double>();
        if (j.contains("alpha_nominal") && !j["alpha_nominal"].is_null()) m.alpha_nominal = j["alpha_nominal"].get<double>();
        const auto& atoms = j.at("atoms");
        const auto n = static_cast<Eigen::Index>(atoms.size());
        m.points.resize(m.ambient_dim, n);
        m.weights.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& a = atoms[static_cast<std::size_t>(i)];
            auto x = a.at("x").get<std::vector<double>>();
            require(static_cast<int>(x.size()) == m.ambient_dim, "measure JSON: atom dimension mismatch");
            for (int c = 0; c < m.ambient_dim; ++c) m.points(c, i) = x[static_cast<std::size_t>(c)];
            m.weights[i] = a.at("w").get<double>();
            require(m.weights[i] > 0.0, "measure JSON: weights must be positive");
        }
        for (const auto& f : j.at("tangent_frames")) {
            Eigen::MatrixXd frame(m.ambient_dim, static_cast<Eigen::Index>(f.size()));
            for (std::size_t c = 0; c < f.size(); ++c) {
                auto col = f[c].get<std::vector<double>>();
                require(static_cast<int>(col.size()) == m.ambient_dim, "measure JSON: frame dimension mismatch");
                for (int r = 0; r < m.ambient_dim; ++r) frame(r, static_cast<Eigen::Index>(c)) = col[static_cast<std::size_t>(r)];
            }
            m.tangent_frames.push_back(std::move(frame));
        }
        require(m.tangent_frames.empty() || m.tangent_frames.size() == m.size(), "measure JSON: frame count mismatch");
        m.diameter = j.contains("diameter") ? j["diameter"].get<double>() : cloud_diameter(m.points);
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed measure JSON: ") + e.what());
    }
}

nlohmann::json to_json(const MeasureClassReport& r) {
    auto rows = nlohmann::json::array();
    for (const auto& row : r.per_radius)
        rows.push_back({{"r", row.radius}, {"min", row.min_ratio}, {"max", row.max_ratio}, {"mean", row.mean_ratio}});
    return {{"alpha_hat", r.alpha_hat},   {"alpha_tested", r.alpha_tested}, {"A_hat", r.A_hat},
            {"B_hat", r.B_hat},           {"per_radius", rows},             {"class_verdict", to_string(r.verdict)},
            {"upper_holds", r.upper_holds}, {"lower_holds", r.lower_holds}, {"centers_used", r.centers_used}};
}

void save_measure(const std::filesystem::path& path, const SingularMeasure& m) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << to_json(m).dump() << '\n';
}

SingularMeasure load_measure(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("malformed measure JSON: " + std::string(e.what()));
    }
    return measure_from_json(j);
}

std::string fingerprint(const SingularMeasure& m) {
    Fnv1a h;
    h.update(to_string(m.kind));
    h.update_pod(std::span<const double>(m.points.data(), static_cast<std::size_t>(m.points.size())));
    h.update_pod(std::span<const double>(m.weights.data(), static_cast<std::size_t>(m.weights.size())));
    for (const auto& f : m.tangent_frames) h.update_pod(std::span<const double>(f.data(), static_cast<std::size_t>(f.size())));
    return h.hex();
}

}  // namespace sspectra
