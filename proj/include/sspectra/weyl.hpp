#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sspectra/assembly.hpp"
#include "sspectra/kernels.hpp"
#include "sspectra/measures.hpp"

namespace sspectra {

/// FT(|Z|^-theta) = c(N, theta) |Xi|^(theta - N) in R^N, 0 < theta < N.
double riesz_symbol_constant(int N, double theta);
/// FT(-log|Z|) = c_log(N) |Xi|^-N away from the origin.
double log_symbol_constant(int N);

/// r_0(xi) = c |xi|^-(l - dF) after integrating the ambient symbol over the dF normal directions.
double fiber_symbol_constant(int N, int dF, double theta);
double fiber_log_symbol_constant(int N, int dF);

double sigma_weyl(double d, double dF, double l);

// ---- exponent bookkeeping -------------------------------------------------

template <class T>
struct ExponentVariant {
    T p1{}, p2{}, p{};
    bool admissible = false;
};

/// Three readings of the counting exponent p in n(lambda) ~ lambda^-p.
///   canonical:   p_i = 2a / (2g_i - N + a),  1/p = 1/p_1 + 1/p_2  (p = a / (l - N + a))
///   paper_s2:    p_i = a / (2g_i - N + a),   1/p = 1/p_1 + 1/p_2
///   paper_thm32: s_i = a / (2g_i - N + 2a),  p = 2 s_1 s_2 / (s_1 + s_2)
template <class T>
struct ExponentTable {
    T N{}, alpha{}, l{}, gamma1{}, gamma2{};
    ExponentVariant<T> canonical, paper_s2, paper_thm32;
};

template <class T>
ExponentTable<T> exponent_table(T N, T alpha, T l, T gamma1) {
    const T zero(0), two(2);
    ExponentTable<T> t{N, alpha, l, gamma1, l - gamma1, {}, {}, {}};
    const T den1 = two * t.gamma1 - N + alpha, den2 = two * t.gamma2 - N + alpha;
    const T comb = l - N + alpha;

    t.canonical.admissible = comb > zero;
    if (den1 != zero) t.canonical.p1 = two * alpha / den1;
    if (den2 != zero) t.canonical.p2 = two * alpha / den2;
    if (comb != zero) t.canonical.p = alpha / comb;

    // harmonic combination: 1/p = (den1 + den2) / a
    t.paper_s2.admissible = den1 + den2 > zero;
    if (den1 != zero) t.paper_s2.p1 = alpha / den1;
    if (den2 != zero) t.paper_s2.p2 = alpha / den2;
    if (den1 + den2 != zero) t.paper_s2.p = alpha / (den1 + den2);

    const T e1 = two * t.gamma1 - N + two * alpha, e2 = two * t.gamma2 - N + two * alpha;
    t.paper_thm32.admissible = e1 > zero && e2 > zero;
    if (e1 != zero && e2 != zero) {
        t.paper_thm32.p1 = alpha / e1;
        t.paper_thm32.p2 = alpha / e2;
        const T s = t.paper_thm32.p1 + t.paper_thm32.p2;
        if (s != zero) t.paper_thm32.p = two * t.paper_thm32.p1 * t.paper_thm32.p2 / s;
    }
    return t;
}

nlohmann::json to_json(const ExponentTable<double>& t);

// ---- factorization planning -----------------------------------------------

enum class Regime { subcritical, critical, supercritical };
enum class MeasureRequirement { P_plus, P_two_sided };
enum class WeightSpace { L_2sigma, Orlicz_LlogL, L_2 };

std::string to_string(Regime r);
std::string to_string(MeasureRequirement r);
std::string to_string(WeightSpace s);
Regime regime_from_string(const std::string& name);

struct FactorPlan {
    double gamma = 0.0;
    Regime regime = Regime::subcritical;
    WeightSpace space = WeightSpace::L_2;
    /// sigma_i of the estimate; for subcritical factors the weight lives in L_{2 sigma_i}.
    double sigma = 1.0;
    /// Lebesgue exponent of the weight space (2 sigma_i, or 2); 0 for Orlicz.
    double lebesgue_exponent = 2.0;
    /// alpha > N - 2 gamma_i (subcritical factors only; true otherwise).
    bool alpha_admissible = true;
};

struct FactorizationPlan {
    int N = 0;
    double l = 0.0, alpha = 0.0;
    FactorPlan factor1, factor2;
    /// Case 1..6: (sub,sub) (sub,crit) (sub,super) (crit,crit) (crit,super) (super,super).
    int item = 0;
    MeasureRequirement measure = MeasureRequirement::P_two_sided;
    ExponentTable<double> exponents;
    std::vector<std::string> warnings;
};

Regime classify_regime(int N, double gamma);
FactorizationPlan plan_factorization(int N, double l, double alpha, double gamma1);
nlohmann::json to_json(const FactorizationPlan& p);

// ---- weight norms -----------------------------------------------------------

/// Psi(t) = (1 + t) log(1 + t) - t.
double orlicz_psi(double t);
/// inf{k > 0 : sum_i Psi(g_i / k) w_i <= 1}.
double luxemburg_norm(std::span<const double> g, std::span<const double> weights);
double luxemburg_norm(std::span<const double> g, const SingularMeasure& m);

/// F- and mu-dependent factor of the singular-number estimate for one factor.
double weight_norm_factor(Regime regime, const WeightField& F, const SingularMeasure& m, double sigma);

// ---- Weyl coefficient -------------------------------------------------------

enum class Normalization { canonical, paper };
std::string to_string(Normalization n);
Normalization normalization_from_string(const std::string& name);

/// Tr [M]_+^sigma and Tr [M]_-^sigma of the Hermitian part of M.
std::pair<double, double> matrix_density(const Eigen::MatrixXcd& m, double sigma);

struct CircleOracle;

struct WeylPrediction {
    double sigma_w = 0.0;
    /// Exponent as literally printed next to the coefficient formula (2 sigma_w); reported only.
    double sigma_paper = 0.0;
    int d = 0, dF = 0;
    double l = 0.0;
    /// Unit-amplitude constant of r_0.
    double symbol_constant = 0.0;
    Normalization normalization = Normalization::canonical;
    double A_plus = 0.0, A_minus = 0.0;
    double A_plus_canonical = 0.0, A_minus_canonical = 0.0;
    double A_plus_paper = 0.0, A_minus_paper = 0.0;
    std::vector<double> density_plus, density_minus;
    ExponentTable<double> exponents;
    std::optional<double> oracle_theta, oracle_c_inf;
};

struct WeylOptions {
    Normalization normalization = Normalization::canonical;
    /// Numeric fiber symbol r_0(X, xi) for non-radial leading terms (xi a unit tangent vector).
    std::function<Eigen::MatrixXcd(Point, const Eigen::VectorXd&)> symbol;
};

WeylPrediction weyl_coefficient(const SingularMeasure& m, const KernelSpec& kernel, const WeightField& F,
                                const WeylOptions& options = {});
WeylPrediction weyl_coefficient(const SingularMeasure& m, const KernelSpec& kernel, const WeightField& F,
                                Normalization normalization);

nlohmann::json to_json(const WeylPrediction& p);

// ---- circle oracle ----------------------------------------------------------

enum class OracleKernel { riesz, log };

/// Fourier coefficients of |X - Y|^-theta (or -log|X - Y|) on the unit circle:
/// g(n) = int_0^{2 pi} k(2 sin(phi/2)) e^{-i n phi} d phi, n = 0..n_max.
struct CircleOracle {
    double theta = 0.0;
    OracleKernel kernel = OracleKernel::riesz;
    std::vector<double> coefficients;
    /// lim n^(1 - theta) g(n)
    double c_inf = 0.0;

    /// All eigenvalues g(n), |n| <= n_max, sorted descending.
    std::vector<double> eigenvalues() const;
};

double circle_fourier_coefficient(double theta, long n, OracleKernel kernel = OracleKernel::riesz);
CircleOracle circle_oracle(double theta, long n_max, OracleKernel kernel = OracleKernel::riesz);
nlohmann::json to_json(const CircleOracle& o);

}  // namespace sspectra
