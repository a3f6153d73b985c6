#include "sspectra/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sspectra/error.hpp"

namespace sspectra {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double kRegimeTol = 1e-12;

struct Kahan {
    double sum = 0.0, c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

double positive_part(double x) { return 0.5 * (std::abs(x) + x); }
double negative_part(double x) { return 0.5 * (std::abs(x) - x); }

nlohmann::json variant_json(const ExponentVariant<double>& v) {
    return {{"p1", v.p1}, {"p2", v.p2}, {"p", v.p}, {"admissible", v.admissible}};
}

int regime_rank(Regime r) { return static_cast<int>(r); }

FactorPlan make_factor(int N, double alpha, double gamma, double canonical_p, std::vector<std::string>& warnings,
                       const char* name) {
    FactorPlan f;
    f.gamma = gamma;
    f.regime = classify_regime(N, gamma);
    switch (f.regime) {
        case Regime::subcritical:
            f.space = WeightSpace::L_2sigma;
            f.sigma = canonical_p / 2.0;
            f.lebesgue_exponent = 2.0 * f.sigma;
            f.alpha_admissible = alpha > N - 2.0 * gamma;
            if (!f.alpha_admissible)
                warnings.push_back(std::string(name) + ": alpha <= N - 2 gamma, subcritical estimate not available");
            if (!(2.0 * alpha > N - 2.0 * gamma))
                warnings.push_back(std::string(name) + ": 2 alpha > N - 2 gamma fails");
            break;
        case Regime::critical:
            f.space = WeightSpace::Orlicz_LlogL;
            f.sigma = 1.0;
            f.lebesgue_exponent = 0.0;
            break;
        case Regime::supercritical:
            f.space = WeightSpace::L_2;
            f.sigma = canonical_p / 2.0;
            f.lebesgue_exponent = 2.0;
            break;
    }
    return f;
}

nlohmann::json factor_json(const FactorPlan& f) {
    return {{"gamma", f.gamma},
            {"regime", to_string(f.regime)},
            {"weight_space", to_string(f.space)},
            {"sigma", f.sigma},
            {"lebesgue_exponent", f.lebesgue_exponent},
            {"alpha_admissible", f.alpha_admissible}};
}

// Unit tangent directions and weights for the sphere S^{d-1} of the tangent space.
void sphere_nodes(const Eigen::MatrixXd& frame, std::size_t nodes_2d, std::vector<Eigen::VectorXd>& dirs,
                  std::vector<double>& wts) {
    dirs.clear();
    wts.clear();
    const auto d = frame.cols();
    if (d == 1) {
        dirs.push_back(frame.col(0));
        dirs.push_back(-frame.col(0));
        wts = {1.0, 1.0};
    } else if (d == 2) {
        for (std::size_t k = 0; k < nodes_2d; ++k) {
            double t = 2.0 * pi * static_cast<double>(k) / static_cast<double>(nodes_2d);
            dirs.push_back(std::cos(t) * frame.col(0) + std::sin(t) * frame.col(1));
            wts.push_back(2.0 * pi / static_cast<double>(nodes_2d));
        }
    } else {
        throw ValidationError("weyl_coefficient: sphere quadrature implemented for d <= 2");
    }
}

double first_panel_integrand(double theta, long n, double t, OracleKernel kernel) {
    if (kernel == OracleKernel::log) {
        // phi = t^4 leaves t^3 log t, smooth enough for Gauss-Kronrod
        if (t == 0.0) return 0.0;
        const double t2 = t * t, phi = t2 * t2;
        const double ratio = phi < 1e-8 ? 1.0 : 2.0 * std::sin(phi / 2.0) / phi;
        return -(4.0 * std::log(t) + std::log(ratio)) * std::cos(static_cast<double>(n) * phi) * 4.0 * t2 * t;
    }
    // phi = t^(1/(1-theta)); the Jacobian cancels phi^-theta
    double phi = std::pow(t, 1.0 / (1.0 - theta));
    double ratio = phi < 1e-8 ? 1.0 : phi / (2.0 * std::sin(phi / 2.0));
    return std::pow(ratio, theta) * std::cos(static_cast<double>(n) * phi) / (1.0 - theta);
}

double kernel_on_circle(double theta, double phi, OracleKernel kernel) {
    double chord = 2.0 * std::sin(phi / 2.0);
    return kernel == OracleKernel::log ? -std::log(chord) : std::pow(chord, -theta);
}

}  // namespace

double riesz_symbol_constant(int N, double theta) {
    require(N >= 1, "riesz_symbol_constant: N must be >= 1");
    require(theta > 0.0 && theta < N, "riesz_symbol_constant: theta must lie in (0, N)");
    return std::pow(pi, N / 2.0) * std::pow(2.0, N - theta) * std::tgamma((N - theta) / 2.0) / std::tgamma(theta / 2.0);
}

double log_symbol_constant(int N) {
    require(N >= 1, "log_symbol_constant: N must be >= 1");
    return std::pow(pi, N / 2.0) * std::pow(2.0, N - 1) * std::tgamma(N / 2.0);
}

namespace {
double fiber_factor(int N, int dF, double l) {
    require(dF >= 0 && dF < N, "fiber symbol: codimension must lie in [0, N)");
    if (!(l - dF > 0.0)) throw ValidationError("fiber symbol: requires l > dF");
    if (dF == 0) return 1.0;
    return std::pow(2.0 * pi, -dF) * std::pow(pi, dF / 2.0) * std::tgamma((l - dF) / 2.0) / std::tgamma(l / 2.0);
}
}  // namespace

double fiber_symbol_constant(int N, int dF, double theta) {
    const double l = N - theta;
    const double f = fiber_factor(N, dF, l);
    return riesz_symbol_constant(N, theta) * f;
}

double fiber_log_symbol_constant(int N, int dF) { return log_symbol_constant(N) * fiber_factor(N, dF, N); }

double sigma_weyl(double d, double dF, double l) {
    require(d > 0.0, "sigma_weyl: d must be positive");
    if (!(l > dF)) throw ValidationError("sigma_weyl: requires l > dF");
    return d / (l - dF);
}

nlohmann::json to_json(const ExponentTable<double>& t) {
    return {{"N", t.N},
            {"alpha", t.alpha},
            {"l", t.l},
            {"gamma1", t.gamma1},
            {"gamma2", t.gamma2},
            {"canonical", variant_json(t.canonical)},
            {"paper_s2", variant_json(t.paper_s2)},
            {"paper_thm32", variant_json(t.paper_thm32)}};
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::subcritical: return "subcritical";
        case Regime::critical: return "critical";
        case Regime::supercritical: return "supercritical";
    }
    return "";
}

Regime regime_from_string(const std::string& name) {
    if (name == "subcritical") return Regime::subcritical;
    if (name == "critical") return Regime::critical;
    if (name == "supercritical") return Regime::supercritical;
    throw ValidationError("unknown regime: " + name);
}

std::string to_string(MeasureRequirement r) { return r == MeasureRequirement::P_plus ? "P_plus" : "P_two_sided"; }

std::string to_string(WeightSpace s) {
    switch (s) {
        case WeightSpace::L_2sigma: return "L_2sigma";
        case WeightSpace::Orlicz_LlogL: return "Orlicz_LlogL";
        case WeightSpace::L_2: return "L_2";
    }
    return "";
}

Regime classify_regime(int N, double gamma) {
    const double s = 2.0 * gamma - N;
    if (std::abs(s) <= kRegimeTol * std::max(1.0, static_cast<double>(N))) return Regime::critical;
    return s < 0.0 ? Regime::subcritical : Regime::supercritical;
}

FactorizationPlan plan_factorization(int N, double l, double alpha, double gamma1) {
    require(N >= 1, "plan_factorization: N must be >= 1");
    require(gamma1 > 0.0 && gamma1 < l, "plan_factorization: gamma1 must lie in (0, l)");
    require(alpha > 0.0, "plan_factorization: alpha must be positive");
    FactorizationPlan p;
    p.N = N;
    p.l = l;
    p.alpha = alpha;
    p.exponents = exponent_table<double>(N, alpha, l, gamma1);
    p.factor1 = make_factor(N, alpha, gamma1, p.exponents.canonical.p1, p.warnings, "factor 1");
    p.factor2 = make_factor(N, alpha, l - gamma1, p.exponents.canonical.p2, p.warnings, "factor 2");
    int a = regime_rank(p.factor1.regime), b = regime_rank(p.factor2.regime);
    if (a > b) std::swap(a, b);
    static constexpr int items[3][3] = {{1, 2, 3}, {2, 4, 5}, {3, 5, 6}};
    p.item = items[a][b];
    p.measure = p.item == 1 ? MeasureRequirement::P_plus : MeasureRequirement::P_two_sided;
    if (!p.exponents.canonical.admissible) p.warnings.push_back("l <= N - alpha: combined exponent inadmissible");
    return p;
}

nlohmann::json to_json(const FactorizationPlan& p) {
    return {{"N", p.N},
            {"l", p.l},
            {"alpha", p.alpha},
            {"item", p.item},
            {"measure_class", to_string(p.measure)},
            {"factor1", factor_json(p.factor1)},
            {"factor2", factor_json(p.factor2)},
            {"exponent_table", to_json(p.exponents)},
            {"warnings", p.warnings}};
}

double orlicz_psi(double t) {
    if (t < 1e-4) return t * t * (0.5 - t * (1.0 / 6.0 - t / 12.0));
    return (1.0 + t) * std::log1p(t) - t;
}

double luxemburg_norm(std::span<const double> g, std::span<const double> weights) {
    require(g.size() == weights.size(), "luxemburg_norm: size mismatch");
    double gmax = 0.0;
    for (double v : g) {
        require(std::isfinite(v) && v >= 0.0, "luxemburg_norm: values must be finite and non-negative");
        gmax = std::max(gmax, v);
    }
    if (gmax == 0.0) return 0.0;
    auto modular = [&](double k) {
        Kahan s;
        for (std::size_t i = 0; i < g.size(); ++i) s.add(orlicz_psi(g[i] / k) * weights[i]);
        return s.sum;
    };
    double hi = gmax;
    while (modular(hi) > 1.0) hi *= 2.0;
    double lo = hi;
    while (modular(lo) <= 1.0) lo /= 2.0;
    while ((hi - lo) > 1e-13 * hi) {
        double mid = 0.5 * (lo + hi);
        if (modular(mid) > 1.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double luxemburg_norm(std::span<const double> g, const SingularMeasure& m) {
    return luxemburg_norm(g, std::span<const double>(m.weights.data(), m.size()));
}

double weight_norm_factor(Regime regime, const WeightField& F, const SingularMeasure& m, double sigma) {
    require(F.size() == m.size(), "weight_norm_factor: weight field and measure sizes differ");
    require(sigma > 0.0, "weight_norm_factor: sigma must be positive");
    std::vector<double> f2(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) f2[i] = F.magnitude(i) * F.magnitude(i);
    double out = 0.0;
    switch (regime) {
        case Regime::subcritical: {
            Kahan s;
            for (std::size_t i = 0; i < m.size(); ++i) s.add(m.weights[static_cast<Eigen::Index>(i)] * std::pow(f2[i], sigma));
            out = s.sum;
            break;
        }
        case Regime::critical: out = luxemburg_norm(f2, m); break;
        case Regime::supercritical: {
            Kahan s;
            for (std::size_t i = 0; i < m.size(); ++i) s.add(m.weights[static_cast<Eigen::Index>(i)] * f2[i]);
            out = std::pow(s.sum, sigma) * std::pow(m.total_mass(), 2.0 - 2.0 * sigma);
            break;
        }
    }
    if (!std::isfinite(out)) throw NumericalError("weight_norm_factor: non-finite norm");
    return out;
}

std::string to_string(Normalization n) { return n == Normalization::canonical ? "canonical" : "paper"; }

Normalization normalization_from_string(const std::string& name) {
    if (name == "canonical") return Normalization::canonical;
    if (name == "paper") return Normalization::paper;
    throw ValidationError("unknown normalization: " + name);
}

std::pair<double, double> matrix_density(const Eigen::MatrixXcd& m, double sigma) {
    require(m.rows() == m.cols(), "matrix_density: matrix must be square");
    if (m.rows() == 1) {
        const double x = m(0, 0).real();
        return {std::pow(positive_part(x), sigma), std::pow(negative_part(x), sigma)};
    }
    Eigen::MatrixXcd h = (m + m.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("matrix_density: eigensolver failed");
    double plus = 0.0, minus = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double x = es.eigenvalues()(i);
        plus += std::pow(positive_part(x), sigma);
        minus += std::pow(negative_part(x), sigma);
    }
    return {plus, minus};
}

WeylPrediction weyl_coefficient(const SingularMeasure& m, const KernelSpec& kernel, const WeightField& F,
                                Normalization normalization) {
    WeylOptions o;
    o.normalization = normalization;
    return weyl_coefficient(m, kernel, F, o);
}

WeylPrediction weyl_coefficient(const SingularMeasure& m, const KernelSpec& kernel, const WeightField& F,
                                const WeylOptions& options) {
    if (!m.is_surface() || !m.intrinsic_dim || !m.codim)
        throw ValidationError("weyl_coefficient: measure has no tangent frames");
    require(kernel.ambient_dim() == m.ambient_dim, "weyl_coefficient: kernel and measure ambient dimensions differ");
    require(F.size() == m.size(), "weyl_coefficient: weight field and measure sizes differ");
    require(F.matrix_size() == kernel.matrix_size(), "weyl_coefficient: weight and kernel matrix sizes differ");

    const KernelTerm& lead = kernel.leading();
    const int N = kernel.ambient_dim();
    const int d = *m.intrinsic_dim, dF = *m.codim;

    WeylPrediction p;
    p.d = d;
    p.dF = dF;
    double coef = 0.0;
    switch (lead.form) {
        case TermForm::riesz:
            if (!(kernel.theta() > 0.0)) throw ValidationError("weyl_coefficient: leading term is not singular");
            p.l = N - kernel.theta();
            p.sigma_w = sigma_weyl(d, dF, p.l);
            if (lead.radial()) coef = p.symbol_constant = fiber_symbol_constant(N, dF, kernel.theta());
            break;
        case TermForm::log:
            p.l = N;
            p.sigma_w = sigma_weyl(d, dF, p.l);
            // the term is a log|Z|, whose symbol is -a * c_log
            p.symbol_constant = fiber_log_symbol_constant(N, dF);
            coef = -p.symbol_constant;
            break;
        case TermForm::smooth: throw ValidationError("weyl_coefficient: leading term is not singular");
    }
    if (!lead.radial() && !options.symbol)
        throw ValidationError("weyl_coefficient: non-radial leading term needs a numeric symbol");
    p.sigma_paper = 2.0 * p.sigma_w;
    p.normalization = options.normalization;
    p.exponents = exponent_table<double>(N, d, p.l, p.l / 2.0);

    const std::size_t nodes_2d = lead.radial() ? 64 : 256;
    std::vector<Eigen::VectorXd> dirs;
    std::vector<double> wts;
    p.density_plus.resize(m.size());
    p.density_minus.resize(m.size());
    Kahan sum_plus, sum_minus;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto x = m.point(i);
        sphere_nodes(m.tangent_frames[i], nodes_2d, dirs, wts);
        Eigen::MatrixXcd base;
        if (lead.radial()) base = kernel.wrap(x, x, lead.amplitude(x, x) * coef);
        Kahan rp, rm;
        for (std::size_t q = 0; q < dirs.size(); ++q) {
            Eigen::MatrixXcd r0 = lead.radial() ? base : kernel.wrap(x, x, options.symbol(x, dirs[q]));
            Eigen::MatrixXcd mat = F.at(i) * r0 * F.at(i).adjoint();
            auto [dp, dm] = matrix_density(mat, p.sigma_w);
            rp.add(wts[q] * dp);
            rm.add(wts[q] * dm);
        }
        p.density_plus[i] = rp.sum;
        p.density_minus[i] = rm.sum;
        const double w = m.weights[static_cast<Eigen::Index>(i)];
        sum_plus.add(w * rp.sum);
        sum_minus.add(w * rm.sum);
    }
    const double canonical = 1.0 / (d * std::pow(2.0 * pi, d));
    p.A_plus_canonical = canonical * sum_plus.sum;
    p.A_minus_canonical = canonical * sum_minus.sum;
    p.A_plus_paper = 2.0 * pi * p.A_plus_canonical;
    p.A_minus_paper = 2.0 * pi * p.A_minus_canonical;
    const bool paper = options.normalization == Normalization::paper;
    p.A_plus = paper ? p.A_plus_paper : p.A_plus_canonical;
    p.A_minus = paper ? p.A_minus_paper : p.A_minus_canonical;
    if (!std::isfinite(p.A_plus) || !std::isfinite(p.A_minus)) throw NumericalError("weyl_coefficient: non-finite coefficient");
    return p;
}

nlohmann::json to_json(const WeylPrediction& p) {
    nlohmann::json j = {{"sigma_w", p.sigma_w},
                        {"sigma_paper", p.sigma_paper},
                        {"d", p.d},
                        {"dF", p.dF},
                        {"l", p.l},
                        {"symbol_constant", p.symbol_constant},
                        {"normalization", to_string(p.normalization)},
                        {"A_plus", p.A_plus},
                        {"A_minus", p.A_minus},
                        {"canonical", {{"A_plus", p.A_plus_canonical}, {"A_minus", p.A_minus_canonical}}},
                        {"paper", {{"A_plus", p.A_plus_paper}, {"A_minus", p.A_minus_paper}}},
                        {"exponent_table",
                         {{"canonical", p.exponents.canonical.p},
                          {"paper_s2", p.exponents.paper_s2.p},
                          {"paper_thm32", p.exponents.paper_thm32.p}}}};
    if (p.oracle_c_inf) j["oracle"] = {{"theta", *p.oracle_theta}, {"c_inf", *p.oracle_c_inf}};
    else j["oracle"] = nullptr;
    return j;
}

double circle_fourier_coefficient(double theta, long n, OracleKernel kernel) {
    using boost::math::quadrature::gauss_kronrod;
    if (kernel == OracleKernel::riesz) require(theta >= 0.0 && theta < 1.0, "circle_oracle: theta must lie in [0, 1)");
    n = std::abs(n);
    const bool singular = kernel == OracleKernel::log || theta > 0.0;
    const long panels = std::max(8L, 4 * n);
    const double width = pi / static_cast<double>(panels);
    const double nd = static_cast<double>(n);
    Kahan total;
    double err_sum = 0.0;
    for (long k = 0; k < panels; ++k) {
        double err = 0.0, v = 0.0;
        if (k == 0 && singular) {
            double tmax = kernel == OracleKernel::log ? std::pow(width, 0.25) : std::pow(width, 1.0 - theta);
            v = gauss_kronrod<double, 31>::integrate(
                [&](double t) { return first_panel_integrand(theta, n, t, kernel); }, 0.0, tmax, 8, 1e-10, &err);
        } else {
            double a = width * static_cast<double>(k), b = a + width;
            v = gauss_kronrod<double, 31>::integrate(
                [&](double phi) { return kernel_on_circle(theta, phi, kernel) * std::cos(nd * phi); }, a, b, 8, 1e-10,
                &err);
        }
        if (!std::isfinite(v)) throw NumericalError("circle_oracle: non-finite quadrature value");
        // |Kronrod - Gauss| per panel; a loose bound on the true error
        err_sum += err;
        total.add(v);
    }
    if (err_sum > 1e-9) throw NumericalError("circle_oracle: quadrature did not converge");
    return 2.0 * total.sum;
}

CircleOracle circle_oracle(double theta, long n_max, OracleKernel kernel) {
    require(n_max >= 0, "circle_oracle: n_max must be non-negative");
    if (kernel == OracleKernel::log) require(theta == 0.0, "circle_oracle: log variant has theta = 0");
    CircleOracle o;
    o.theta = theta;
    o.kernel = kernel;
    o.coefficients.resize(static_cast<std::size_t>(n_max) + 1);
    for (long n = 0; n <= n_max; ++n) o.coefficients[static_cast<std::size_t>(n)] = circle_fourier_coefficient(theta, n, kernel);

    // Richardson in 1/n^2 over n = 64, 128, 256
    const double e = 1.0 - theta;
    double v[3];
    for (int k = 0; k < 3; ++k) {
        const long n = 64L << k;
        v[k] = circle_fourier_coefficient(theta, n, kernel) * std::pow(static_cast<double>(n), e);
    }
    const double r0 = (4.0 * v[1] - v[0]) / 3.0, r1 = (4.0 * v[2] - v[1]) / 3.0;
    o.c_inf = (16.0 * r1 - r0) / 15.0;
    return o;
}

std::vector<double> CircleOracle::eigenvalues() const {
    std::vector<double> out;
    if (coefficients.empty()) return out;
    out.push_back(coefficients[0]);
    for (std::size_t n = 1; n < coefficients.size(); ++n) {
        out.push_back(coefficients[n]);
        out.push_back(coefficients[n]);
    }
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

nlohmann::json to_json(const CircleOracle& o) {
    return {{"theta", o.theta},
            {"kernel", o.kernel == OracleKernel::log ? "log" : "riesz"},
            {"coefficients", o.coefficients},
            {"c_inf", o.c_inf}};
}

}  // namespace sspectra
