#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "sspectra/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sspectra/error.hpp"

namespace sspectra {

namespace {

void check_info(lapack_int info, const char* routine) {
    if (info < 0) throw ValidationError(std::string(routine) + ": illegal argument " + std::to_string(-info));
    if (info > 0) throw NumericalError(std::string(routine) + ": failed to converge (info " + std::to_string(info) + ")");
}

double hermitian_defect(const Eigen::MatrixXcd& a) {
    double scale = a.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (a - a.adjoint()).cwiseAbs().maxCoeff() / scale;
}

std::vector<double> order_by_magnitude(const Eigen::VectorXd& w) {
    std::vector<double> v(w.data(), w.data() + w.size());
    std::stable_sort(v.begin(), v.end(), [](double x, double y) {
        if (std::abs(x) != std::abs(y)) return std::abs(x) > std::abs(y);
        return x > y;
    });
    return v;
}

template <class Mat>
double eigen_residual(const Mat& a, const Mat& v, const Eigen::VectorXd& w) {
    const double norm = w.cwiseAbs().maxCoeff();
    if (norm == 0.0) return 0.0;
    Mat r = a * v;
    r -= v * w.asDiagonal();
    return r.colwise().norm().maxCoeff() / norm;
}

struct EigenOut {
    Eigen::VectorXd w;
    double residual;
};

// Real symmetric tridiagonal eigenpairs by MRRR (?stemr); d and e are overwritten.
void tridiagonal_eigen(Eigen::VectorXd& d, Eigen::VectorXd& e, Eigen::VectorXd& w, Eigen::MatrixXd& z) {
    const auto n = static_cast<lapack_int>(d.size());
    w.resize(n);
    z.resize(n, n);
    lapack_int found = 0;
    lapack_logical tryrac = 1;
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
    check_info(LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'A', n, d.data(), e.data(), 0.0, 0.0, 0, 0, &found, w.data(),
                              z.data(), n, n, support.data(), &tryrac),
               "dstemr");
    if (found != n) throw NumericalError("dstemr: found " + std::to_string(found) + " of " + std::to_string(n) + " eigenvalues");
}

// Householder reduction to real tridiagonal form, MRRR on the tridiagonal, then back-transformation.
template <class Mat>
EigenOut eigen_dense(const Mat& a) {
    const auto n = a.rows();
    if (n == 1) return {Eigen::VectorXd::Constant(1, std::real(a(0, 0))), 0.0};
    Eigen::Tridiagonalization<Mat> tri(a);
    Eigen::VectorXd d = tri.diagonal();
    Eigen::VectorXd e(n);
    e.head(n - 1) = tri.subDiagonal();
    e(n - 1) = 0.0;
    Eigen::VectorXd w;
    Eigen::MatrixXd z;
    tridiagonal_eigen(d, e, w, z);
    Mat q = tri.matrixQ();
    Mat v = q * z.cast<typename Mat::Scalar>();
    return {w, eigen_residual(a, v, w)};
}

template <class Mat>
Spectrum svd_general(const Mat& a) {
    Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw NumericalError("singular_values: SVD failed");
    const Eigen::VectorXd& s = svd.singularValues();
    Spectrum out;
    out.kind = SpectrumKind::singular_values;
    out.values.assign(s.data(), s.data() + s.size());
    std::sort(out.values.begin(), out.values.end(), std::greater<>());
    if (s.size() > 0 && s.maxCoeff() > 0.0) {
        Mat r = a * svd.matrixV();
        r -= svd.matrixU() * s.asDiagonal();
        out.residual = r.colwise().norm().maxCoeff() / s.maxCoeff();
    }
    return out;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string to_string(SpectrumKind kind) {
    return kind == SpectrumKind::signed_eigenvalues ? "signed_eigenvalues" : "singular_values";
}

std::string to_string(Sign sign) {
    switch (sign) {
        case Sign::plus: return "+";
        case Sign::minus: return "-";
        case Sign::abs: return "abs";
    }
    return "abs";
}

Sign sign_from_string(const std::string& name) {
    if (name == "+" || name == "plus") return Sign::plus;
    if (name == "-" || name == "minus") return Sign::minus;
    if (name == "abs") return Sign::abs;
    throw ValidationError("unknown sign: " + name);
}

OperatorMatrix as_operator(Eigen::MatrixXcd entries, bool hermitian) {
    OperatorMatrix a;
    a.entries = std::move(entries);
    a.hermitian = hermitian;
    return a;
}

OperatorMatrix as_operator(const Eigen::MatrixXd& entries, bool hermitian) {
    return as_operator(Eigen::MatrixXcd(entries.cast<cplx>()), hermitian);
}

Spectrum hermitian_eigen(const OperatorMatrix& a) {
    require(a.entries.rows() == a.entries.cols(), "hermitian_eigen: matrix must be square");
    require(a.hermitian, "hermitian_eigen: matrix is not flagged Hermitian");
    require(hermitian_defect(a.entries) <= 1e-13, "hermitian_eigen: matrix is not Hermitian");
    Spectrum out;
    out.kind = SpectrumKind::signed_eigenvalues;
    if (a.entries.size() == 0) return out;
    EigenOut r = a.is_real() ? eigen_dense(Eigen::MatrixXd(a.entries.real())) : eigen_dense(a.entries);
    if (!r.w.allFinite()) throw NumericalError("hermitian_eigen: non-finite eigenvalues");
    out.values = order_by_magnitude(r.w);
    out.residual = r.residual;
    return out;
}

Spectrum singular_values(const OperatorMatrix& a) {
    if (a.hermitian) {
        Spectrum e = hermitian_eigen(a);
        Spectrum out;
        out.kind = SpectrumKind::singular_values;
        out.residual = e.residual;
        out.values.reserve(e.values.size());
        for (double v : e.values) out.values.push_back(std::abs(v));
        std::sort(out.values.begin(), out.values.end(), std::greater<>());
        return out;
    }
    if (a.entries.size() == 0) return {};
    Spectrum out = a.is_real() ? svd_general(Eigen::MatrixXd(a.entries.real())) : svd_general(a.entries);
    for (double v : out.values)
        if (!std::isfinite(v)) throw NumericalError("singular_values: non-finite value");
    return out;
}

std::size_t counting(const Spectrum& s, double lambda, Sign sign) {
    if (!(lambda > 0.0)) throw ValidationError("counting: lambda must be positive");
    std::size_t c = 0;
    for (double v : s.values) {
        double x = sign == Sign::plus ? v : sign == Sign::minus ? -v : std::abs(v);
        if (x > lambda) ++c;
    }
    return c;
}

KyFanReport kyfan_verify(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, const std::vector<double>& lambda_grid) {
    require(a.cols() == b.cols(), "kyfan_verify: A and B* are not composable");
    auto sv = [](const Eigen::MatrixXcd& m) { return singular_values(as_operator(m, false)); };
    const Spectrum sa = sv(a), sb = sv(b), sab = sv(a * b.adjoint());
    auto count_above = [](const Spectrum& s, double t) {
        return static_cast<std::size_t>(std::count_if(s.values.begin(), s.values.end(), [t](double v) { return v > t; }));
    };
    KyFanReport report;
    for (double l1 : lambda_grid)
        for (double l2 : lambda_grid) {
            // guard band: ties resolved in favour of the inequality
            const std::size_t lhs = count_above(sab, l1 * l2 * (1.0 + kKyFanGuard));
            const std::size_t rhs = count_above(sa, l1 * (1.0 - kKyFanGuard)) + count_above(sb, l2 * (1.0 - kKyFanGuard));
            ++report.checks;
            if (lhs > rhs) report.violations.push_back({l1, l2, lhs, rhs});
        }
    return report;
}

nlohmann::json to_json(const Spectrum& s) {
    return {{"kind", to_string(s.kind)}, {"values", s.values}, {"residual", s.residual}};
}

Spectrum spectrum_from_json(const nlohmann::json& j) {
    try {
        Spectrum s;
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "signed_eigenvalues") s.kind = SpectrumKind::signed_eigenvalues;
        else if (kind == "singular_values") s.kind = SpectrumKind::singular_values;
        else throw ValidationError("unknown spectrum kind: " + kind);
        s.values = j.at("values").get<std::vector<double>>();
        s.residual = j.value("residual", 0.0);
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed spectrum JSON: ") + e.what());
    }
}

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << "index,value,sign\n";
    const bool signed_kind = s.kind == SpectrumKind::signed_eigenvalues;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        out << i + 1 << ',' << format_double(s.values[i]) << ',';
        if (signed_kind) out << (s.values[i] < 0.0 ? '-' : '+');
        out << '\n';
    }
    std::ofstream side(path.string() + ".json");
    side << nlohmann::json{{"kind", to_string(s.kind)}, {"residual", s.residual}, {"count", s.values.size()}}.dump(2)
         << '\n';
}

Spectrum read_spectrum_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "index,value,sign") throw ValidationError("bad spectrum CSV header in " + path.string());
    Spectrum s;
    bool any_sign = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string idx, val, sgn;
        std::getline(ss, idx, ',');
        std::getline(ss, val, ',');
        std::getline(ss, sgn, ',');
        try {
            s.values.push_back(std::stod(val));
        } catch (const std::exception&) {
            throw ValidationError("bad spectrum CSV value: " + line);
        }
        any_sign = any_sign || !sgn.empty();
    }
    s.kind = any_sign ? SpectrumKind::signed_eigenvalues : SpectrumKind::singular_values;
    std::ifstream side(path.string() + ".json");
    if (side) {
        try {
            nlohmann::json j;
            side >> j;
            s.residual = j.value("residual", 0.0);
            if (j.contains("kind"))
                s.kind = j["kind"] == "signed_eigenvalues" ? SpectrumKind::signed_eigenvalues : SpectrumKind::singular_values;
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(std::string("malformed spectrum sidecar: ") + e.what());
        }
    }
    return s;
}

}  // namespace sspectra
