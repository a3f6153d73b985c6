#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sspectra/error.hpp"
#include "sspectra/kernels.hpp"

using namespace sspectra;

namespace {

struct Pair {
    std::vector<double> x, y;
};

std::vector<Pair> random_pairs(int N, int count, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Pair> out;
    for (int i = 0; i < count; ++i) {
        Pair p{std::vector<double>(N), std::vector<double>(N)};
        for (int k = 0; k < N; ++k) p.x[k] = u(rng), p.y[k] = u(rng);
        out.push_back(std::move(p));
    }
    return out;
}

cplx ev(const KernelSpec& k, std::vector<double> x, std::vector<double> y) { return k.eval_scalar(x, y); }

}  // namespace

TEST_CASE("riesz kernel values") {
    CHECK(ev(riesz_kernel(2, 1.0), {2.0, 0.0}, {0.0, 0.0}).real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(ev(riesz_kernel(2, 0.5), {0.6, 0.8}, {0.0, 0.0}).real() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ev(riesz_kernel(2, 1.0), {1.0, 0.0}, {0.0, 0.0}).real() == 1.0);
    CHECK_THROWS_AS(riesz_kernel(3, 3.0), ValidationError);
    CHECK_THROWS_AS(riesz_kernel(2, -0.1), ValidationError);
    CHECK_NOTHROW(riesz_kernel(2, 0.0));
}

TEST_CASE("log kernel values") {
    const auto k = log_kernel(2);
    const double e = std::numbers::e;
    CHECK(ev(k, {1.0, 0.0}, {0.0, 0.0}).real() == 0.0);
    CHECK(ev(k, {1.0 / e, 0.0}, {0.0, 0.0}).real() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ev(k, {e, 0.0}, {0.0, 0.0}).real() == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("lower-order terms") {
    const auto k = add_lower_order(riesz_kernel(2, 0.5, Coefficient::constant(2.0)), KernelTerm::riesz(0.5, Coefficient::constant(3.0)));
    CHECK(k.terms().size() == 2);
    CHECK(ev(k, {0.0, 1.0}, {0.0, 0.0}).real() == doctest::Approx(5.0).epsilon(1e-15));
    CHECK_THROWS_AS(add_lower_order(riesz_kernel(2, 0.5), KernelTerm::riesz(-1.5, Coefficient::constant(1.0))), ValidationError);
    CHECK_THROWS_AS(add_lower_order(riesz_kernel(2, 0.5), KernelTerm::riesz(-0.5, Coefficient::constant(1.0))), ValidationError);
}

TEST_CASE("evaluation is linear in the terms") {
    const auto k1 = riesz_kernel(3, 1.2, Coefficient::constant(0.7));
    const auto k2 = KernelTerm::riesz(-0.2, Coefficient::exp_dot(0.3));
    const auto sum = add_lower_order(k1, k2);
    const KernelSpec only2(3, 1, {k2}, true);
    for (const auto& p : random_pairs(3, 100, 11)) {
        const cplx direct = k1.eval_scalar(p.x, p.y) + only2.eval_scalar(p.x, p.y);
        CHECK(std::abs(sum.eval_scalar(p.x, p.y) - direct) <= 1e-15 * std::max(1.0, std::abs(direct)));
    }
}

TEST_CASE("multipliers") {
    const auto base = riesz_kernel(2, 0.5);
    SUBCASE("identity multiplier is exact") {
        const auto k = apply_multiplier(base, MultiplierSpec{Coefficient::constant(1.0)}, std::nullopt, true);
        for (const auto& p : random_pairs(2, 100, 3)) CHECK(k.eval_scalar(p.x, p.y) == base.eval_scalar(p.x, p.y));
    }
    SUBCASE("separable left factor") {
        auto a = [](Point x, Point) { return Eigen::MatrixXcd::Constant(1, 1, cplx(1.0 + x[0] * x[0], 0.0)); };
        const auto k = apply_multiplier(base, MultiplierSpec{Coefficient::callable(a, 1, "a")});
        const auto ref = riesz_kernel(2, 0.5, Coefficient::callable(a, 1, "a"), false);
        for (const auto& p : random_pairs(2, 100, 4))
            CHECK(std::abs(k.eval_scalar(p.x, p.y) - ref.eval_scalar(p.x, p.y)) <= 1e-15 * std::abs(ref.eval_scalar(p.x, p.y)));
        CHECK_FALSE(k.hermitian());
    }
    SUBCASE("exp(X.Y) with X.Y = 0") {
        const auto k = apply_multiplier(base, MultiplierSpec{Coefficient::exp_dot(1.0)}, std::nullopt, true);
        CHECK(ev(k, {1.0, 0.0}, {0.0, 0.0}).real() == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(k.hermitian());
    }
    SUBCASE("size mismatch") {
        CHECK_THROWS_AS(apply_multiplier(base, MultiplierSpec{Coefficient::exp_dot(1.0, 2)}), ValidationError);
    }
}

TEST_CASE("hermitian symmetry and homogeneity") {
    Eigen::Matrix2cd a;
    a << 2.0, cplx(0.5, 0.25), cplx(0.5, -0.25), 1.0;
    const auto k = add_lower_order(riesz_kernel(3, 1.5, Coefficient::constant(a)),
                                   KernelTerm::riesz(-0.5, Coefficient::constant(Eigen::MatrixXcd(a))));
    REQUIRE(k.hermitian());
    for (const auto& p : random_pairs(3, 100, 5)) {
        const Eigen::MatrixXcd xy = k.eval(p.x, p.y), yx = k.eval(p.y, p.x);
        CHECK((xy - yx.adjoint()).cwiseAbs().maxCoeff() <= 1e-15 * xy.cwiseAbs().maxCoeff());
    }
    const auto r = riesz_kernel(2, 0.7);
    for (const auto& p : random_pairs(2, 20, 6)) {
        std::vector<double> y2 = {2 * p.y[0] - p.x[0], 2 * p.y[1] - p.x[1]};  // X - Y2 = 2 (X - Y)
        const double ratio = ev(r, p.x, y2).real() / ev(r, p.x, p.y).real();
        CHECK(ratio == doctest::Approx(std::pow(2.0, -0.7)).epsilon(1e-13));
    }
}

TEST_CASE("diagonal evaluation is rejected") {
    const auto k = riesz_kernel(2, 0.5);
    CHECK_THROWS_AS(ev(k, {0.3, 0.3}, {0.3, 0.3}), ValidationError);
}

TEST_CASE("kernel JSON round trip") {
    auto k = add_lower_order(riesz_kernel(2, 0.5, Coefficient::constant(1.5)), KernelTerm::riesz(0.5, Coefficient::constant(-0.25)));
    k = apply_multiplier(k, MultiplierSpec{Coefficient::exp_dot(1.0)}, std::nullopt, true);
    const auto back = KernelSpec::from_json(k.to_json());
    CHECK(back.fingerprint() == k.fingerprint());
    for (const auto& p : random_pairs(2, 20, 8)) CHECK(back.eval_scalar(p.x, p.y) == k.eval_scalar(p.x, p.y));
    const auto l = KernelSpec::from_json(log_kernel(2, Coefficient::constant(2.0)).to_json());
    CHECK(ev(l, {1.0 / std::numbers::e, 0.0}, {0.0, 0.0}).real() == doctest::Approx(2.0));
}
