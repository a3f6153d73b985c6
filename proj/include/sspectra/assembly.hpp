#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sspectra/kernels.hpp"
#include "sspectra/measures.hpp"

namespace sspectra {

/// Per-atom weight F(X_i): scalar (k = 1) or k x k matrix.
class WeightField {
public:
    WeightField() = default;
    WeightField(std::size_t atoms, std::size_t k, std::vector<cplx> values, std::string label);

    static WeightField constant(std::size_t atoms, cplx value, std::string label = "constant");
    static WeightField identity(std::size_t atoms, std::size_t k, std::string label = "identity");
    static WeightField from_function(const SingularMeasure& m, const std::function<cplx(Point)>& f, std::string label = "user");
    static WeightField from_matrix_function(const SingularMeasure& m, std::size_t k,
                                            const std::function<Eigen::MatrixXcd(Point)>& f, std::string label = "user");

    std::size_t size() const { return atoms_; }
    std::size_t matrix_size() const { return k_; }
    const std::string& label() const { return label_; }
    cplx scalar(std::size_t i) const { return values_[i * k_ * k_]; }
    Eigen::Map<const Eigen::MatrixXcd> at(std::size_t i) const {
        const auto kk = static_cast<Eigen::Index>(k_);
        return {values_.data() + i * k_ * k_, kk, kk};
    }
    /// Operator norm |F(X_i)|.
    double magnitude(std::size_t i) const;

    WeightField adjoint() const;
    WeightField scaled(cplx c) const;
    /// Atom-wise product F(X_i) G(X_i).
    WeightField times(const WeightField& other) const;
    bool is_adjoint_of(const WeightField& other) const;

    std::string fingerprint() const;

private:
    std::size_t atoms_ = 0;
    std::size_t k_ = 1;
    std::vector<cplx> values_;
    std::string label_;
};

enum class DiagonalRule { ball_average, zero };
std::string to_string(DiagonalRule rule);
DiagonalRule diagonal_rule_from_string(const std::string& name);

/// Effective local dimension and ball-mass constant: mu(B(X, r)) ~ ball_constant * r^dim.
struct DiagonalContext {
    double dim = 1.0;
    double ball_constant = 2.0;
};

/// Surface kinds use (d, volume of the unit d-ball); other kinds use (alpha_hat, A_hat)
/// from the measure's class report.
DiagonalContext diagonal_context(const SingularMeasure& m);

/// Radius of the d-ball whose mass equals the atom weight.
double ball_radius(const SingularMeasure& m, std::size_t atom, const DiagonalContext& ctx);

/// Surrogate for K(X_i, X_i, 0): the average of every term over the ball of `ball_radius`.
Eigen::MatrixXcd diagonal_value(DiagonalRule rule, const SingularMeasure& m, std::size_t atom, const KernelSpec& kernel,
                                const DiagonalContext& ctx);
Eigen::MatrixXcd diagonal_value(DiagonalRule rule, const SingularMeasure& m, std::size_t atom, const KernelSpec& kernel);

struct Provenance {
    std::string measure;
    std::string kernel;
    std::string weight_left;
    std::string weight_right;
    std::string diagonal_rule;
    bool kernel_serializable = true;
};

/// Dense symmetrized Galerkin matrix of T[mu, K, F1, F2] on L2(mu).
struct OperatorMatrix {
    Eigen::MatrixXcd entries;
    bool hermitian = false;
    std::size_t block_size = 1;
    Provenance provenance;

    std::size_t dim() const { return static_cast<std::size_t>(entries.rows()); }
    bool is_real() const;
};

inline constexpr std::size_t kMaxMatrixDim = 4096;

OperatorMatrix assemble(const SingularMeasure& m, const KernelSpec& kernel, const WeightField& F1, const WeightField& F2,
                        DiagonalRule rule);
OperatorMatrix assemble(const SingularMeasure& m, const KernelSpec& kernel, const WeightField& F1, const WeightField& F2,
                        DiagonalRule rule, const DiagonalContext& ctx);

nlohmann::json to_json(const Provenance& p);

/// Binary layout: "SSPM", u32 version, u32 dim, u32 flags, then row-major little-endian
/// (re, im) float64 pairs. A JSON provenance sidecar is written to `<path>.json`.
void write_matrix(const std::filesystem::path& path, const OperatorMatrix& a);
OperatorMatrix read_matrix(const std::filesystem::path& path);

inline constexpr std::uint32_t kMatrixFormatVersion = 1;
inline constexpr std::uint32_t kFlagHermitian = 1U << 0;

}  // namespace sspectra
