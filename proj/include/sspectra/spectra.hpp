#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sspectra/assembly.hpp"

namespace sspectra {

enum class SpectrumKind { signed_eigenvalues, singular_values };
enum class Sign { plus, minus, abs };

std::string to_string(SpectrumKind kind);
std::string to_string(Sign sign);
Sign sign_from_string(const std::string& name);

/// Eigenvalues sorted by descending |value| (signs kept), or singular values descending.
struct Spectrum {
    SpectrumKind kind = SpectrumKind::singular_values;
    std::vector<double> values;
    /// max_j ||A v_j - lambda_j v_j|| / ||A||
    double residual = 0.0;

    std::size_t size() const { return values.size(); }
};

/// Wraps a raw matrix; `hermitian` is taken as declared.
OperatorMatrix as_operator(Eigen::MatrixXcd entries, bool hermitian);
OperatorMatrix as_operator(const Eigen::MatrixXd& entries, bool hermitian);

/// Full dense decomposition: Householder tridiagonalization, MRRR (LAPACK dstemr), back-transform.
/// Requires the hermitian flag.
Spectrum hermitian_eigen(const OperatorMatrix& a);
/// Hermitian input reuses the eigendecomposition; otherwise divide-and-conquer SVD.
Spectrum singular_values(const OperatorMatrix& a);

/// Number of values strictly greater than lambda (after applying the sign).
std::size_t counting(const Spectrum& s, double lambda, Sign sign);

struct KyFanViolation {
    double lambda1, lambda2;
    std::size_t lhs, rhs;
};

struct KyFanReport {
    std::size_t checks = 0;
    std::vector<KyFanViolation> violations;
};

inline constexpr double kKyFanGuard = 1e-9;

/// n(l1 l2, A B*) <= n(l1, A) + n(l2, B) over grid x grid.
KyFanReport kyfan_verify(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, const std::vector<double>& lambda_grid);

nlohmann::json to_json(const Spectrum& s);
Spectrum spectrum_from_json(const nlohmann::json& j);

/// CSV "index,value,sign" (1-based index; sign empty for singular values) plus `<path>.json`.
void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s);
Spectrum read_spectrum_csv(const std::filesystem::path& path);

}  // namespace sspectra
