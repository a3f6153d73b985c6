#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sspectra/measures.hpp"

namespace sspectra {

using cplx = std::complex<double>;

/// A smooth pointwise factor a(X, Y): scalar (k = 1) or k x k matrix valued.
///
/// Built-in factors are serializable by id; arbitrary callables are accepted but
/// flagged as non-serializable.
class Coefficient {
public:
    using Fn = std::function<Eigen::MatrixXcd(Point, Point)>;

    static Coefficient constant(cplx value);
    static Coefficient constant(const Eigen::MatrixXcd& value);
    /// exp(scale * X.Y) times the k x k identity.
    static Coefficient exp_dot(double scale, std::size_t k = 1);
    static Coefficient callable(Fn fn, std::size_t k, std::string label = "user");
    static Coefficient from_json(const nlohmann::json& j);

    std::size_t size() const { return k_; }
    bool is_constant() const { return !fn_; }
    bool serializable() const { return id_ != "user"; }
    const std::string& id() const { return id_; }
    const Eigen::MatrixXcd& constant_value() const { return value_; }

    Eigen::MatrixXcd operator()(Point x, Point y) const { return fn_ ? fn_(x, y) : value_; }
    cplx scalar(Point x, Point y) const { return fn_ ? fn_(x, y)(0, 0) : value_(0, 0); }

    /// Real symmetric (k = 1: real; k > 1: Hermitian) constant.
    bool is_hermitian_constant() const;
    nlohmann::json to_json() const;

private:
    std::string id_ = "constant";
    nlohmann::json params_;
    std::size_t k_ = 1;
    Eigen::MatrixXcd value_;
    Fn fn_;
};

enum class TermForm { riesz, log, smooth };

/// One term of a polyhomogeneous expansion in Z = X - Y.
///
/// riesz:  a(X,Y) |Z|^degree * angular(Z/|Z|)
/// log:    a(X,Y) log|Z|  (degree 0)
/// smooth: a(X,Y)          (ordered after every singular term)
struct KernelTerm {
    TermForm form = TermForm::riesz;
    double degree = 0.0;
    Coefficient amplitude = Coefficient::constant(1.0);
    /// Optional angular profile on the unit sphere of R^N; empty means radial.
    std::function<double(Point)> angular;

    static KernelTerm riesz(double degree, Coefficient amplitude);
    static KernelTerm log(Coefficient amplitude);
    static KernelTerm smooth(Coefficient value);

    bool radial() const { return !angular; }
    /// Ordering key; smooth terms sort last.
    double order_key() const { return form == TermForm::smooth ? std::numeric_limits<double>::infinity() : degree; }
};

struct MultiplierSpec {
    Coefficient phi;
    /// Declared, not verified. Negative means C^infinity.
    int declared_smoothness = -1;
};

/// Phi_left(X,Y) K Phi_right(Y,X)^*; `right` empty means no right factor.
struct MultiplierLayer {
    std::shared_ptr<const MultiplierSpec> left;
    std::shared_ptr<const MultiplierSpec> right;
    bool right_is_left = false;
};

std::string to_string(TermForm form);

/// Immutable polyhomogeneous kernel K(X, Y, X - Y) with optional Schur multipliers.
class KernelSpec {
public:
    KernelSpec(int ambient_dim, std::size_t matrix_size, std::vector<KernelTerm> terms, bool hermitian);

    int ambient_dim() const { return N_; }
    std::size_t matrix_size() const { return k_; }
    const std::vector<KernelTerm>& terms() const { return terms_; }
    const std::vector<MultiplierLayer>& multipliers() const { return layers_; }
    bool hermitian() const { return hermitian_; }
    /// Singularity exponent of the leading term (theta, with leading degree -theta).
    double theta() const { return -terms_.front().degree; }
    const KernelTerm& leading() const { return terms_.front(); }
    bool serializable() const;

    /// K(X, Y, X - Y); throws ValidationError on X == Y.
    Eigen::MatrixXcd eval(Point x, Point y) const;
    /// Fast path for k == 1.
    cplx eval_scalar(Point x, Point y) const;

    /// Applies the multiplier layers to a base value at (X, Y).
    Eigen::MatrixXcd wrap(Point x, Point y, Eigen::MatrixXcd base) const;
    cplx wrap_scalar(Point x, Point y, cplx base) const;

    KernelSpec with_term(KernelTerm term) const;
    KernelSpec with_multiplier(MultiplierLayer layer, bool keeps_hermitian) const;

    nlohmann::json to_json() const;
    static KernelSpec from_json(const nlohmann::json& j);
    std::string fingerprint() const;

private:
    int N_;
    std::size_t k_;
    std::vector<KernelTerm> terms_;
    std::vector<MultiplierLayer> layers_;
    bool hermitian_;
};

/// a |Z|^-theta in R^N, 0 <= theta < N.
KernelSpec riesz_kernel(int N, double theta, Coefficient amplitude = Coefficient::constant(1.0),
                        std::optional<bool> hermitian = std::nullopt);

/// -Q(X,Y) log|Z|; positive near the diagonal when Q > 0.
KernelSpec log_kernel(int N, Coefficient Q = Coefficient::constant(1.0), std::optional<bool> hermitian = std::nullopt);

/// Appends a lower-order term; its degree must exceed that of every existing term.
KernelSpec add_lower_order(const KernelSpec& kernel, KernelTerm term);

/// Phi_left(X,Y) K(X,Y,X-Y) Phi_right(Y,X)^*. Pass `right_same_as_left` for the
/// symmetric form, which keeps a Hermitian kernel Hermitian.
KernelSpec apply_multiplier(const KernelSpec& kernel, const MultiplierSpec& left,
                            const std::optional<MultiplierSpec>& right = std::nullopt, bool right_same_as_left = false);

inline Eigen::MatrixXcd eval_kernel(const KernelSpec& kernel, Point x, Point y) { return kernel.eval(x, y); }

}  // namespace sspectra
