#include "sspectra/assembly.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>

#include "sspectra/error.hpp"
#include "sspectra/hash.hpp"
#include "sspectra/parallel.hpp"

namespace sspectra {

namespace {

double unit_ball_volume(double d) { return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0); }

void put_u32(std::ostream& out, std::uint32_t v) {
    std::array<char, 4> b{};
    for (int i = 0; i < 4; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xffU);
    out.write(b.data(), 4);
}

void put_f64(std::ostream& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    std::array<char, 8> b{};
    for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((bits >> (8 * i)) & 0xffU);
    out.write(b.data(), 8);
}

std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

double get_f64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return std::bit_cast<double>(v);
}

}  // namespace

WeightField::WeightField(std::size_t atoms, std::size_t k, std::vector<cplx> values, std::string label)
    : atoms_(atoms), k_(k), values_(std::move(values)), label_(std::move(label)) {
    require(k_ >= 1, "WeightField: matrix size must be >= 1");
    require(values_.size() == atoms_ * k_ * k_, "WeightField: value count mismatch");
    for (const auto& v : values_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw ValidationError("WeightField: non-finite entry");
}

WeightField WeightField::constant(std::size_t atoms, cplx value, std::string label) {
    return WeightField(atoms, 1, std::vector<cplx>(atoms, value), std::move(label));
}

WeightField WeightField::identity(std::size_t atoms, std::size_t k, std::string label) {
    std::vector<cplx> v(atoms * k * k, 0.0);
    for (std::size_t i = 0; i < atoms; ++i)
        for (std::size_t a = 0; a < k; ++a) v[i * k * k + a * k + a] = 1.0;
    return WeightField(atoms, k, std::move(v), std::move(label));
}

WeightField WeightField::from_function(const SingularMeasure& m, const std::function<cplx(Point)>& f, std::string label) {
    std::vector<cplx> v(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) v[i] = f(m.point(i));
    return WeightField(m.size(), 1, std::move(v), std::move(label));
}

WeightField WeightField::from_matrix_function(const SingularMeasure& m, std::size_t k,
                                              const std::function<Eigen::MatrixXcd(Point)>& f, std::string label) {
    std::vector<cplx> v(m.size() * k * k);
    for (std::size_t i = 0; i < m.size(); ++i) {
        Eigen::MatrixXcd value = f(m.point(i));
        require(static_cast<std::size_t>(value.rows()) == k && static_cast<std::size_t>(value.cols()) == k,
                "WeightField: callable returned wrong size");
        std::copy(value.data(), value.data() + k * k, v.begin() + static_cast<std::ptrdiff_t>(i * k * k));
    }
    return WeightField(m.size(), k, std::move(v), std::move(label));
}

double WeightField::magnitude(std::size_t i) const {
    if (k_ == 1) return std::abs(scalar(i));
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(at(i));
    return svd.singularValues()(0);
}

WeightField WeightField::adjoint() const {
    std::vector<cplx> v(values_.size());
    for (std::size_t i = 0; i < atoms_; ++i) {
        Eigen::MatrixXcd a = at(i).adjoint();
        std::copy(a.data(), a.data() + k_ * k_, v.begin() + static_cast<std::ptrdiff_t>(i * k_ * k_));
    }
    return WeightField(atoms_, k_, std::move(v), label_ + "*");
}

WeightField WeightField::scaled(cplx c) const {
    auto v = values_;
    for (auto& x : v) x *= c;
    return WeightField(atoms_, k_, std::move(v), label_);
}

WeightField WeightField::times(const WeightField& other) const {
    require(atoms_ == other.atoms_, "WeightField: atom count mismatch");
    if (other.k_ == 1 && k_ == 1) {
        std::vector<cplx> v(atoms_);
        for (std::size_t i = 0; i < atoms_; ++i) v[i] = values_[i] * other.values_[i];
        return WeightField(atoms_, 1, std::move(v), label_ + "*" + other.label_);
    }
    require(k_ == other.k_, "WeightField: matrix size mismatch");
    std::vector<cplx> v(values_.size());
    for (std::size_t i = 0; i < atoms_; ++i) {
        Eigen::MatrixXcd p = at(i) * other.at(i);
        std::copy(p.data(), p.data() + k_ * k_, v.begin() + static_cast<std::ptrdiff_t>(i * k_ * k_));
    }
    return WeightField(atoms_, k_, std::move(v), label_ + "*" + other.label_);
}

bool WeightField::is_adjoint_of(const WeightField& other) const {
    if (atoms_ != other.atoms_ || k_ != other.k_) return false;
    for (std::size_t i = 0; i < atoms_; ++i)
        for (std::size_t r = 0; r < k_; ++r)
            for (std::size_t c = 0; c < k_; ++c)
                if (values_[i * k_ * k_ + c * k_ + r] != std::conj(other.values_[i * k_ * k_ + r * k_ + c])) return false;
    return true;
}

std::string WeightField::fingerprint() const {
    Fnv1a h;
    h.update_pod(std::span<const cplx>(values_));
    return h.hex();
}

std::string to_string(DiagonalRule rule) { return rule == DiagonalRule::ball_average ? "ball_average" : "zero"; }

DiagonalRule diagonal_rule_from_string(const std::string& name) {
    if (name == "ball_average") return DiagonalRule::ball_average;
    if (name == "zero") return DiagonalRule::zero;
    throw ValidationError("unknown diagonal rule: " + name);
}

DiagonalContext diagonal_context(const SingularMeasure& m) {
    if (m.intrinsic_dim) {
        double d = *m.intrinsic_dim;
        return {d, unit_ball_volume(d)};
    }
    ClassReportOptions opts;
    opts.n_centers = std::min<std::size_t>(64, m.size());
    auto report = measure_class_report(m, opts);
    return {report.alpha_hat, report.A_hat};
}

double ball_radius(const SingularMeasure& m, std::size_t atom, const DiagonalContext& ctx) {
    return std::pow(m.weights[static_cast<Eigen::Index>(atom)] / ctx.ball_constant, 1.0 / ctx.dim);
}

Eigen::MatrixXcd diagonal_value(DiagonalRule rule, const SingularMeasure& m, std::size_t atom, const KernelSpec& kernel,
                                const DiagonalContext& ctx) {
    const auto kk = static_cast<Eigen::Index>(kernel.matrix_size());
    if (rule == DiagonalRule::zero) return Eigen::MatrixXcd::Zero(kk, kk);
    if (kernel.theta() >= ctx.dim)
        throw ValidationError("diagonal_value: ball_average needs theta < d (theta = " + std::to_string(kernel.theta()) +
                              ", d = " + std::to_string(ctx.dim) + ")");
    const double r = ball_radius(m, atom, ctx);
    const double d = ctx.dim;
    const auto x = m.point(atom);
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(kk, kk);
    for (const auto& t : kernel.terms()) {
        require(t.radial(), "diagonal_value: ball_average supports radial terms only");
        switch (t.form) {
            case TermForm::riesz: {
                const double s = -t.degree;
                sum += t.amplitude(x, x) * (d / (d - s) * std::pow(r, -s));
                break;
            }
            case TermForm::log: sum += t.amplitude(x, x) * (std::log(r) - 1.0 / d); break;
            case TermForm::smooth: sum += t.amplitude(x, x); break;
        }
    }
    return kernel.wrap(x, x, std::move(sum));
}

Eigen::MatrixXcd diagonal_value(DiagonalRule rule, const SingularMeasure& m, std::size_t atom, const KernelSpec& kernel) {
    if (rule == DiagonalRule::zero) {
        const auto kk = static_cast<Eigen::Index>(kernel.matrix_size());
        return Eigen::MatrixXcd::Zero(kk, kk);
    }
    return diagonal_value(rule, m, atom, kernel, diagonal_context(m));
}

bool OperatorMatrix::is_real() const {
    const auto* p = entries.data();
    for (Eigen::Index i = 0; i < entries.size(); ++i)
        if (p[i].imag() != 0.0) return false;
    return true;
}

OperatorMatrix assemble(const SingularMeasure& m, const KernelSpec& kernel, const WeightField& F1, const WeightField& F2,
                        DiagonalRule rule) {
    DiagonalContext ctx = rule == DiagonalRule::ball_average ? diagonal_context(m) : DiagonalContext{};
    return assemble(m, kernel, F1, F2, rule, ctx);
}

OperatorMatrix assemble(const SingularMeasure& m, const KernelSpec& kernel, const WeightField& F1, const WeightField& F2,
                        DiagonalRule rule, const DiagonalContext& ctx) {
    const std::size_t n = m.size();
    const std::size_t k = kernel.matrix_size();
    require(kernel.ambient_dim() == m.ambient_dim, "assemble: kernel and measure ambient dimensions differ");
    require(F1.size() == n && F2.size() == n, "assemble: weight fields must have one value per atom");
    require(F1.matrix_size() == k && F2.matrix_size() == k, "assemble: weight and kernel matrix sizes differ");
    require(n * k <= kMaxMatrixDim, "assemble: matrix dimension exceeds 4096");
    for (std::size_t i = 0; i < n; ++i) require(m.weights[static_cast<Eigen::Index>(i)] > 0.0, "assemble: weights must be positive");

    OperatorMatrix out;
    out.block_size = k;
    out.entries.resize(static_cast<Eigen::Index>(n * k), static_cast<Eigen::Index>(n * k));
    Eigen::VectorXd root_w = m.weights.array().sqrt();

    if (k == 1) {
        parallel_for(n, [&](std::size_t i) {
            const auto ii = static_cast<Eigen::Index>(i);
            const auto xi = m.point(i);
            const cplx left = F1.scalar(i);
            for (std::size_t j = 0; j < n; ++j) {
                const auto jj = static_cast<Eigen::Index>(j);
                cplx v;
                if (i == j) {
                    v = m.weights[ii] * left * diagonal_value(rule, m, i, kernel, ctx)(0, 0) * F2.scalar(i);
                } else {
                    cplx kv = kernel.eval_scalar(xi, m.point(j));
                    if (!std::isfinite(kv.real()) || !std::isfinite(kv.imag()))
                        throw NumericalError("assemble: non-finite kernel value at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
                    v = root_w[ii] * root_w[jj] * left * kv * F2.scalar(j);
                }
                out.entries(ii, jj) = v;
            }
        });
    } else {
        const auto kk = static_cast<Eigen::Index>(k);
        parallel_for(n, [&](std::size_t i) {
            const auto ii = static_cast<Eigen::Index>(i);
            const auto xi = m.point(i);
            for (std::size_t j = 0; j < n; ++j) {
                const auto jj = static_cast<Eigen::Index>(j);
                Eigen::MatrixXcd block;
                if (i == j) {
                    block = m.weights[ii] * F1.at(i) * diagonal_value(rule, m, i, kernel, ctx) * F2.at(i);
                } else {
                    Eigen::MatrixXcd kv = kernel.eval(xi, m.point(j));
                    if (!kv.allFinite())
                        throw NumericalError("assemble: non-finite kernel value at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
                    block = (root_w[ii] * root_w[jj]) * F1.at(i) * kv * F2.at(j);
                }
                out.entries.block(ii * kk, jj * kk, kk, kk) = block;
            }
        });
    }

    out.hermitian = kernel.hermitian() && F2.is_adjoint_of(F1);
    if (out.hermitian) {
        Eigen::MatrixXcd sym = (out.entries + out.entries.adjoint()) * 0.5;
        out.entries = std::move(sym);
    }
    out.provenance = {fingerprint(m), kernel.fingerprint(), F1.fingerprint(), F2.fingerprint(), to_string(rule),
                      kernel.serializable()};
    return out;
}

nlohmann::json to_json(const Provenance& p) {
    return {{"measure", p.measure},           {"kernel", p.kernel},
            {"weight_left", p.weight_left},   {"weight_right", p.weight_right},
            {"diagonal_rule", p.diagonal_rule}, {"kernel_serializable", p.kernel_serializable}};
}

void write_matrix(const std::filesystem::path& path, const OperatorMatrix& a) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out.write("SSPM", 4);
    put_u32(out, kMatrixFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(a.dim()));
    put_u32(out, a.hermitian ? kFlagHermitian : 0U);
    const auto n = a.entries.rows();
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) {
            put_f64(out, a.entries(r, c).real());
            put_f64(out, a.entries(r, c).imag());
        }
    if (!out) throw ValidationError("write failed: " + path.string());

    nlohmann::json side = {{"format", "SSPM"},
                           {"version", kMatrixFormatVersion},
                           {"dim", a.dim()},
                           {"block_size", a.block_size},
                           {"hermitian", a.hermitian},
                           {"provenance", to_json(a.provenance)}};
    std::ofstream sidecar(path.string() + ".json");
    sidecar << side.dump(2) << '\n';
}

OperatorMatrix read_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path.string());
    std::array<unsigned char, 16> header{};
    in.read(reinterpret_cast<char*>(header.data()), 16);
    if (!in || header[0] != 'S' || header[1] != 'S' || header[2] != 'P' || header[3] != 'M')
        throw ValidationError("not an SSPM matrix file: " + path.string());
    const auto version = get_u32(header.data() + 4);
    if (version != kMatrixFormatVersion) throw ValidationError("unsupported SSPM version " + std::to_string(version));
    const auto n = static_cast<Eigen::Index>(get_u32(header.data() + 8));
    const auto flags = get_u32(header.data() + 12);

    OperatorMatrix a;
    a.hermitian = (flags & kFlagHermitian) != 0;
    a.entries.resize(n, n);
    std::vector<unsigned char> row(static_cast<std::size_t>(n) * 16);
    for (Eigen::Index r = 0; r < n; ++r) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
        if (!in) throw ValidationError("truncated SSPM file: " + path.string());
        for (Eigen::Index c = 0; c < n; ++c) {
            const auto* p = row.data() + c * 16;
            a.entries(r, c) = cplx(get_f64(p), get_f64(p + 8));
        }
    }

    std::ifstream sidecar(path.string() + ".json");
    if (sidecar) {
        try {
            nlohmann::json side;
            sidecar >> side;
            a.block_size = side.value("block_size", std::size_t{1});
            const auto& p = side.at("provenance");
            a.provenance = {p.value("measure", ""),       p.value("kernel", ""),
                            p.value("weight_left", ""),   p.value("weight_right", ""),
                            p.value("diagonal_rule", ""), p.value("kernel_serializable", true)};
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("malformed matrix sidecar: " + std::string(e.what()));
        }
    }
    return a;
}

}  // namespace sspectra
