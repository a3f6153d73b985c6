#include "sspectra/kernels.hpp"

#include <cmath>

#include "sspectra/error.hpp"
#include "sspectra/hash.hpp"

namespace sspectra {

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXcd& m) {
    auto re = nlohmann::json::array(), im = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        std::vector<double> rr, ii;
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            rr.push_back(m(r, c).real());
            ii.push_back(m(r, c).imag());
        }
        re.push_back(rr);
        im.push_back(ii);
    }
    return {{"re", re}, {"im", im}};
}

Eigen::MatrixXcd matrix_from_json(const nlohmann::json& j) {
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    const auto n = static_cast<Eigen::Index>(re.size());
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        auto rr = re[static_cast<std::size_t>(r)].get<std::vector<double>>();
        auto ii = im[static_cast<std::size_t>(r)].get<std::vector<double>>();
        require(static_cast<Eigen::Index>(rr.size()) == n && static_cast<Eigen::Index>(ii.size()) == n,
                "coefficient JSON: matrix must be square");
        for (Eigen::Index c = 0; c < n; ++c) m(r, c) = cplx(rr[static_cast<std::size_t>(c)], ii[static_cast<std::size_t>(c)]);
    }
    return m;
}

double dot(Point x, Point y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double distance(Point x, Point y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - y[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// Applies a possibly scalar (1 x 1) factor from the left or right.
Eigen::MatrixXcd left_apply(const Eigen::MatrixXcd& phi, const Eigen::MatrixXcd& m) {
    if (phi.rows() == 1) return phi(0, 0) * m;
    return phi * m;
}

Eigen::MatrixXcd right_apply_adjoint(const Eigen::MatrixXcd& m, const Eigen::MatrixXcd& phi) {
    if (phi.rows() == 1) return m * std::conj(phi(0, 0));
    return m * phi.adjoint();
}

nlohmann::json multiplier_to_json(const MultiplierSpec& m) {
    auto j = m.phi.to_json();
    j["declared_smoothness"] = m.declared_smoothness;
    return j;
}

MultiplierSpec multiplier_from_json(const nlohmann::json& j) {
    MultiplierSpec m{Coefficient::from_json(j), j.value("declared_smoothness", -1)};
    return m;
}

}  // namespace

Coefficient Coefficient::constant(cplx value) {
    Coefficient c;
    c.value_ = Eigen::MatrixXcd::Constant(1, 1, value);
    c.params_ = {{"re", value.real()}, {"im", value.imag()}};
    return c;
}

Coefficient Coefficient::constant(const Eigen::MatrixXcd& value) {
    require(value.rows() == value.cols() && value.rows() >= 1, "Coefficient: constant matrix must be square");
    if (value.rows() == 1) return constant(value(0, 0));
    Coefficient c;
    c.k_ = static_cast<std::size_t>(value.rows());
    c.value_ = value;
    c.params_ = matrix_to_json(value);
    return c;
}

Coefficient Coefficient::exp_dot(double scale, std::size_t k) {
    require(k >= 1, "Coefficient: size must be >= 1");
    Coefficient c;
    c.id_ = "exp_dot";
    c.k_ = k;
    c.params_ = {{"scale", scale}, {"k", k}};
    const auto kk = static_cast<Eigen::Index>(k);
    c.fn_ = [scale, kk](Point x, Point y) -> Eigen::MatrixXcd {
        return Eigen::MatrixXcd::Identity(kk, kk) * std::exp(scale * dot(x, y));
    };
    return c;
}

Coefficient Coefficient::callable(Fn fn, std::size_t k, std::string label) {
    require(static_cast<bool>(fn), "Coefficient: empty callable");
    require(k >= 1, "Coefficient: size must be >= 1");
    Coefficient c;
    c.id_ = "user";
    c.k_ = k;
    c.params_ = {{"label", std::move(label)}};
    c.fn_ = std::move(fn);
    return c;
}

Coefficient Coefficient::from_json(const nlohmann::json& j) {
    try {
        const auto id = j.at("amplitude_id").get<std::string>();
        const auto& p = j.at("params");
        if (id == "constant") {
            if (p.contains("value")) return constant(cplx(p.at("value").get<double>(), 0.0));
            if (p.at("re").is_number()) return constant(cplx(p.at("re").get<double>(), p.value("im", 0.0)));
            return constant(matrix_from_json(p));
        }
        if (id == "exp_dot") return exp_dot(p.at("scale").get<double>(), p.value("k", std::size_t{1}));
        if (id == "user") throw ValidationError("coefficient JSON: user callables are not serializable");
        throw ValidationError("coefficient JSON: unknown amplitude_id " + id);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed coefficient JSON: ") + e.what());
    }
}

bool Coefficient::is_hermitian_constant() const {
    if (fn_) return false;
    if (k_ == 1) return value_(0, 0).imag() == 0.0;
    return value_ == value_.adjoint();
}

nlohmann::json Coefficient::to_json() const { return {{"amplitude_id", id_}, {"params", params_}}; }

KernelTerm KernelTerm::riesz(double degree, Coefficient amplitude) {
    KernelTerm t;
    t.form = TermForm::riesz;
    t.degree = degree;
    t.amplitude = std::move(amplitude);
    return t;
}

KernelTerm KernelTerm::log(Coefficient amplitude) {
    KernelTerm t;
    t.form = TermForm::log;
    t.degree = 0.0;
    t.amplitude = std::move(amplitude);
    return t;
}

KernelTerm KernelTerm::smooth(Coefficient value) {
    KernelTerm t;
    t.form = TermForm::smooth;
    t.degree = std::numeric_limits<double>::infinity();
    t.amplitude = std::move(value);
    return t;
}

std::string to_string(TermForm form) {
    switch (form) {
        case TermForm::riesz: return "riesz";
        case TermForm::log: return "log";
        case TermForm::smooth: return "smooth";
    }
    return "unknown";
}

KernelSpec::KernelSpec(int ambient_dim, std::size_t matrix_size, std::vector<KernelTerm> terms, bool hermitian)
    : N_(ambient_dim), k_(matrix_size), terms_(std::move(terms)), hermitian_(hermitian) {
    require(N_ >= 1, "KernelSpec: ambient dimension must be >= 1");
    require(k_ >= 1, "KernelSpec: matrix size must be >= 1");
    require(!terms_.empty(), "KernelSpec: at least one term required");
    require(terms_.front().form != TermForm::smooth, "KernelSpec: leading term must be singular (riesz or log)");
    require(theta() < static_cast<double>(N_), "KernelSpec: leading singularity exponent must be < N");
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        const auto& t = terms_[i];
        require(t.amplitude.size() == k_, "KernelSpec: term matrix size mismatch");
        require(t.form != TermForm::log || t.degree == 0.0, "KernelSpec: log terms only at degree 0");
        require(t.form == TermForm::smooth || std::isfinite(t.degree), "KernelSpec: singular term degree must be finite");
        if (i == 0) continue;
        const auto& prev = terms_[i - 1];
        // A log term may share degree 0 with a preceding homogeneous term.
        bool shares_zero = t.form == TermForm::log && prev.form == TermForm::riesz && prev.degree == 0.0;
        require(t.order_key() > prev.order_key() || shares_zero ||
                    (t.form == TermForm::smooth && prev.form != TermForm::smooth),
                "KernelSpec: term degrees must strictly increase");
    }
}

bool KernelSpec::serializable() const {
    for (const auto& t : terms_)
        if (!t.amplitude.serializable() || !t.radial()) return false;
    for (const auto& l : layers_) {
        if (!l.left->phi.serializable()) return false;
        if (l.right && !l.right->phi.serializable()) return false;
    }
    return true;
}

Eigen::MatrixXcd KernelSpec::wrap(Point x, Point y, Eigen::MatrixXcd base) const {
    for (const auto& layer : layers_) {
        base = left_apply(layer.left->phi(x, y), base);
        if (layer.right) base = right_apply_adjoint(base, layer.right->phi(y, x));
    }
    return base;
}

cplx KernelSpec::wrap_scalar(Point x, Point y, cplx base) const {
    for (const auto& layer : layers_) {
        base = layer.left->phi.scalar(x, y) * base;
        if (layer.right) base *= std::conj(layer.right->phi.scalar(y, x));
    }
    return base;
}

Eigen::MatrixXcd KernelSpec::eval(Point x, Point y) const {
    if (k_ == 1) return Eigen::MatrixXcd::Constant(1, 1, eval_scalar(x, y));
    const double r = distance(x, y);
    if (r == 0.0) throw ValidationError("eval_kernel: diagonal evaluation (X == Y); use the assembly diagonal rule");
    const auto kk = static_cast<Eigen::Index>(k_);
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(kk, kk);
    std::vector<double> unit;
    for (const auto& t : terms_) {
        switch (t.form) {
            case TermForm::riesz: {
                double radial = std::pow(r, t.degree);
                if (t.angular) {
                    unit.resize(x.size());
                    for (std::size_t i = 0; i < x.size(); ++i) unit[i] = (x[i] - y[i]) / r;
                    radial *= t.angular(Point(unit));
                }
                sum += t.amplitude(x, y) * radial;
                break;
            }
            case TermForm::log: sum += t.amplitude(x, y) * std::log(r); break;
            case TermForm::smooth: sum += t.amplitude(x, y); break;
        }
    }
    return wrap(x, y, std::move(sum));
}

cplx KernelSpec::eval_scalar(Point x, Point y) const {
    require(k_ == 1, "eval_scalar: matrix-valued kernel");
    const double r = distance(x, y);
    if (r == 0.0) throw ValidationError("eval_kernel: diagonal evaluation (X == Y); use the assembly diagonal rule");
    cplx sum = 0.0;
    std::vector<double> unit;
    for (const auto& t : terms_) {
        switch (t.form) {
            case TermForm::riesz: {
                double radial = std::pow(r, t.degree);
                if (t.angular) {
                    unit.resize(x.size());
                    for (std::size_t i = 0; i < x.size(); ++i) unit[i] = (x[i] - y[i]) / r;
                    radial *= t.angular(Point(unit));
                }
                sum += t.amplitude.scalar(x, y) * radial;
                break;
            }
            case TermForm::log: sum += t.amplitude.scalar(x, y) * std::log(r); break;
            case TermForm::smooth: sum += t.amplitude.scalar(x, y); break;
        }
    }
    return layers_.empty() ? sum : wrap_scalar(x, y, sum);
}

KernelSpec KernelSpec::with_term(KernelTerm term) const {
    auto terms = terms_;
    terms.push_back(std::move(term));
    bool herm = hermitian_ && terms.back().amplitude.is_hermitian_constant() && terms.back().radial();
    KernelSpec out(N_, k_, std::move(terms), herm);
    out.layers_ = layers_;
    return out;
}

KernelSpec KernelSpec::with_multiplier(MultiplierLayer layer, bool keeps_hermitian) const {
    KernelSpec out = *this;
    out.layers_.push_back(std::move(layer));
    out.hermitian_ = hermitian_ && keeps_hermitian;
    return out;
}

nlohmann::json KernelSpec::to_json() const {
    auto terms = nlohmann::json::array();
    for (const auto& t : terms_) {
        auto c = t.amplitude.to_json();
        nlohmann::json term = {{"form", to_string(t.form)},
                               {"degree", t.form == TermForm::smooth ? nlohmann::json(nullptr) : nlohmann::json(t.degree)},
                               {"amplitude_id", c["amplitude_id"]},
                               {"params", c["params"]}};
        if (!t.radial()) term["angular"] = "user";
        terms.push_back(std::move(term));
    }
    auto mults = nlohmann::json::array();
    for (const auto& l : layers_) {
        nlohmann::json right = nullptr;
        if (l.right_is_left) right = "same";
        else if (l.right) right = multiplier_to_json(*l.right);
        mults.push_back({{"left", multiplier_to_json(*l.left)}, {"right", right}});
    }
    return {{"N", N_},
            {"k", k_},
            {"hermitian", hermitian_},
            {"terms", terms},
            {"multipliers", mults},
            {"serializable", serializable()}};
}

KernelSpec KernelSpec::from_json(const nlohmann::json& j) {
    try {
        if (j.contains("serializable") && !j["serializable"].get<bool>())
            throw ValidationError("kernel JSON: kernel contains user callables and cannot be reconstructed");
        const int N = j.at("N").get<int>();
        const auto k = j.value("k", std::size_t{1});
        std::vector<KernelTerm> terms;
        for (const auto& t : j.at("terms")) {
            const auto form = t.at("form").get<std::string>();
            require(!t.contains("angular"), "kernel JSON: angular profiles are not serializable");
            auto amp = Coefficient::from_json(t);
            if (form == "riesz") terms.push_back(KernelTerm::riesz(t.at("degree").get<double>(), amp));
            else if (form == "log") terms.push_back(KernelTerm::log(amp));
            else if (form == "smooth") terms.push_back(KernelTerm::smooth(amp));
            else throw ValidationError("kernel JSON: unknown term form " + form);
        }
        KernelSpec out(N, k, std::move(terms), j.at("hermitian").get<bool>());
        if (j.contains("multipliers")) {
            for (const auto& m : j["multipliers"]) {
                MultiplierLayer layer;
                layer.left = std::make_shared<const MultiplierSpec>(multiplier_from_json(m.at("left")));
                const auto& r = m.at("right");
                if (r.is_string() && r.get<std::string>() == "same") {
                    layer.right = layer.left;
                    layer.right_is_left = true;
                } else if (!r.is_null()) {
                    layer.right = std::make_shared<const MultiplierSpec>(multiplier_from_json(r));
                }
                out.layers_.push_back(std::move(layer));
            }
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed kernel JSON: ") + e.what());
    }
}

std::string KernelSpec::fingerprint() const {
    Fnv1a h;
    h.update(to_json().dump());
    if (!serializable()) {
        // Callables have no stable identity; mark the hash so it is never mistaken for a built-in.
        h.update(std::string_view("non-serializable"));
    }
    return h.hex();
}

KernelSpec riesz_kernel(int N, double theta, Coefficient amplitude, std::optional<bool> hermitian) {
    require(N >= 1, "riesz_kernel: N must be >= 1");
    require(theta >= 0.0 && theta < static_cast<double>(N), "riesz_kernel: theta must lie in [0, N)");
    const std::size_t k = amplitude.size();
    bool herm = hermitian.value_or(amplitude.is_hermitian_constant());
    return KernelSpec(N, k, {KernelTerm::riesz(-theta, std::move(amplitude))}, herm);
}

KernelSpec log_kernel(int N, Coefficient Q, std::optional<bool> hermitian) {
    require(N >= 1, "log_kernel: N must be >= 1");
    const std::size_t k = Q.size();
    bool herm = hermitian.value_or(Q.is_hermitian_constant());
    Coefficient negated = Q.is_constant()
                              ? Coefficient::constant(Eigen::MatrixXcd(-Q.constant_value()))
                              : Coefficient::callable([q = Q](Point x, Point y) -> Eigen::MatrixXcd { return -q(x, y); }, k,
                                                      "negated_user");
    return KernelSpec(N, k, {KernelTerm::log(std::move(negated))}, herm);
}

KernelSpec add_lower_order(const KernelSpec& kernel, KernelTerm term) {
    require(term.amplitude.size() == kernel.matrix_size(), "add_lower_order: matrix size mismatch");
    const auto& last = kernel.terms().back();
    bool ordered = term.order_key() > last.order_key() ||
                   (term.form == TermForm::log && last.form == TermForm::riesz && last.degree == 0.0);
    if (!ordered) throw ValidationError("add_lower_order: degree ordering violation (term must be of lower order)");
    return kernel.with_term(std::move(term));
}

KernelSpec apply_multiplier(const KernelSpec& kernel, const MultiplierSpec& left, const std::optional<MultiplierSpec>& right,
                            bool right_same_as_left) {
    auto fits = [&](const Coefficient& c) { return c.size() == 1 || c.size() == kernel.matrix_size(); };
    require(fits(left.phi), "apply_multiplier: left multiplier size mismatch");
    require(!right || fits(right->phi), "apply_multiplier: right multiplier size mismatch");
    require(!(right && right_same_as_left), "apply_multiplier: pass either an explicit right factor or right_same_as_left");

    MultiplierLayer layer;
    layer.left = std::make_shared<const MultiplierSpec>(left);
    bool symmetric = false;
    if (right_same_as_left) {
        layer.right = layer.left;
        layer.right_is_left = true;
        symmetric = true;
    } else if (right) {
        layer.right = std::make_shared<const MultiplierSpec>(*right);
        symmetric = left.phi.serializable() && right->phi.serializable() && left.phi.to_json() == right->phi.to_json();
        layer.right_is_left = symmetric;
    }
    return kernel.with_multiplier(std::move(layer), symmetric);
}

}  // namespace sspectra
