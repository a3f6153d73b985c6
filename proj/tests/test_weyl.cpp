#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/rational.hpp>

#include "oracles.hpp"
#include "sspectra/error.hpp"
#include "sspectra/weyl.hpp"

using namespace sspectra;
using std::numbers::pi;
using Q = boost::rational<long long>;

TEST_CASE("riesz symbol constants") {
    CHECK(riesz_symbol_constant(3, 1.0) == doctest::Approx(4 * pi).epsilon(1e-14));
    CHECK(riesz_symbol_constant(2, 1.0) == doctest::Approx(2 * pi).epsilon(1e-14));
    CHECK(riesz_symbol_constant(2, 0.5) == doctest::Approx(oracle::kRieszC2Half).epsilon(1e-14));
    for (auto [N, t] : {std::pair{3, 1.0}, {2, 1.0}, {2, 0.5}, {1, 0.3}, {4, 2.7}})
        CHECK(riesz_symbol_constant(N, t) == doctest::Approx(oracle::riesz_constant_gauss(N, t)).epsilon(1e-10));
    for (auto [N, t] : {std::pair{2, 0.5}, {3, 1.2}, {1, 0.4}})
        CHECK(riesz_symbol_constant(N, t) * riesz_symbol_constant(N, N - t) == doctest::Approx(std::pow(2 * pi, N)).epsilon(1e-13));
    CHECK_THROWS_AS(riesz_symbol_constant(2, 0.0), ValidationError);
    CHECK_THROWS_AS(riesz_symbol_constant(2, 2.0), ValidationError);
    CHECK(log_symbol_constant(2) == doctest::Approx(2 * pi).epsilon(1e-14));
}

TEST_CASE("fiber symbol constants") {
    CHECK(fiber_symbol_constant(2, 1, 0.5) == doctest::Approx(std::sqrt(2 * pi)).epsilon(1e-13));
    CHECK(fiber_symbol_constant(2, 1, 0.5) == doctest::Approx(oracle::fiber_eta_integral(0.5)).epsilon(1e-9));
    for (const auto& row : oracle::kCircle) {
        CHECK(fiber_symbol_constant(2, 1, row.theta) == doctest::Approx(row.c_inf).epsilon(1e-12));
        CHECK(fiber_symbol_constant(2, 1, row.theta) == doctest::Approx(oracle::fiber_eta_integral(row.theta)).epsilon(1e-9));
    }
    CHECK(fiber_symbol_constant(3, 0, 1.3) == riesz_symbol_constant(3, 1.3));
    CHECK(fiber_log_symbol_constant(2, 1) == doctest::Approx(pi).epsilon(1e-13));
    CHECK_THROWS_AS(fiber_symbol_constant(2, 1, 1.0), ValidationError);  // l = dF
}

TEST_CASE("Weyl exponent") {
    CHECK(sigma_weyl(1, 1, 1.5) == doctest::Approx(2.0));
    CHECK(sigma_weyl(2, 0, 1) == doctest::Approx(2.0));
    CHECK(sigma_weyl(1, 1, 2) == doctest::Approx(1.0));
    CHECK_THROWS_AS(sigma_weyl(1, 1, 1), ValidationError);
}

TEST_CASE("exponent table in exact arithmetic") {
    const auto t = exponent_table<Q>(Q(2), Q(1), Q(3, 2), Q(3, 4));
    CHECK(t.canonical.p1 == Q(4));
    CHECK(t.canonical.p2 == Q(4));
    CHECK(t.canonical.p == Q(2));
    CHECK(Q(1) / t.canonical.p == Q(1) / t.canonical.p1 + Q(1) / t.canonical.p2);
    CHECK(t.canonical.p == Q(2) * Q(1) / (Q(2) * Q(3, 2) - Q(2)));  // sigma_W = d / (l - dF) at alpha = d
    CHECK(t.paper_thm32.p1 == Q(2, 3));
    CHECK(t.paper_thm32.p == Q(2, 3));
    CHECK(t.paper_thm32.p != t.canonical.p);
    CHECK(t.paper_s2.p == Q(1));

    const double a = std::log(4.0) / std::log(3.0);
    const auto log_case = exponent_table<double>(2.0, a, 2.0, 1.0);
    CHECK(log_case.canonical.p == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(exponent_table<double>(2.0, 0.7, 2.0, 1.0).canonical.p == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_FALSE(exponent_table<double>(2.0, 0.4, 1.5, 0.75).canonical.admissible);
}

TEST_CASE("factorization plans") {
    auto p = plan_factorization(2, 1.5, 1.0, 0.75);
    CHECK(p.item == 1);
    CHECK(p.factor1.regime == Regime::subcritical);
    CHECK(p.factor2.regime == Regime::subcritical);
    CHECK(p.factor1.sigma == doctest::Approx(2.0));
    CHECK(p.factor1.lebesgue_exponent == doctest::Approx(4.0));
    CHECK(p.factor1.space == WeightSpace::L_2sigma);

    p = plan_factorization(2, 2.0, 1.0, 0.5);
    CHECK(p.factor2.gamma == doctest::Approx(1.5));
    CHECK(p.item == 3);
    CHECK(p.factor1.space == WeightSpace::L_2sigma);
    CHECK(p.factor2.space == WeightSpace::L_2);
    CHECK(p.measure == MeasureRequirement::P_two_sided);

    p = plan_factorization(1, 1.0, 1.0, 0.5);
    CHECK(p.item == 4);
    CHECK(p.factor1.space == WeightSpace::Orlicz_LlogL);
    CHECK(p.factor2.space == WeightSpace::Orlicz_LlogL);
    CHECK_NOTHROW(plan_factorization(2, 1.5, 0.3, 0.75));
    CHECK_FALSE(plan_factorization(2, 1.5, 0.3, 0.75).warnings.empty());
}

TEST_CASE("Luxemburg norm") {
    const auto m = make_lebesgue_cube(50, 1);
    std::vector<double> zero(50, 0.0), one(50, 1.0), g(50);
    for (int i = 0; i < 50; ++i) g[i] = 0.1 + i * i / 100.0;
    CHECK(luxemburg_norm(zero, m) == 0.0);
    CHECK(luxemburg_norm(one, m) == doctest::Approx(oracle::kLuxemburgUnit).epsilon(1e-12));
    CHECK(luxemburg_norm(one, m) == doctest::Approx(oracle::luxemburg_constant(1.0, 1.0)).epsilon(1e-12));
    const double base = luxemburg_norm(g, m);
    for (double c : {0.01, 0.5, 3.0, 1e3}) {
        std::vector<double> cg(g);
        for (double& v : cg) v *= c;
        CHECK(std::abs(luxemburg_norm(cg, m) - c * base) <= 1e-9 * c * base);
    }
    CHECK(orlicz_psi(0.0) == 0.0);
    CHECK(orlicz_psi(1.0) == doctest::Approx(2 * std::log(2.0) - 1).epsilon(1e-15));
}

TEST_CASE("weight norm factors") {
    const auto m = make_lebesgue_cube(40, 1);
    const auto one = WeightField::constant(m.size(), 1.0);
    CHECK(weight_norm_factor(Regime::subcritical, one, m, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(weight_norm_factor(Regime::supercritical, one, m, 0.5) == doctest::Approx(m.total_mass()).epsilon(1e-14));
    const auto F = WeightField::from_function(m, [](Point x) { return cplx(1.0 + x[0], 0.5); });
    const cplx c(0.3, -1.1);
    for (double s : {0.75, 2.0}) {
        const double a = weight_norm_factor(Regime::subcritical, F, m, s);
        CHECK(weight_norm_factor(Regime::subcritical, F.scaled(c), m, s) ==
              doctest::Approx(std::pow(std::abs(c), 2 * s) * a).epsilon(1e-13));
    }
    CHECK(weight_norm_factor(Regime::critical, one, m, 1.0) == doctest::Approx(oracle::kLuxemburgUnit).epsilon(1e-12));
}

TEST_CASE("Weyl coefficient on the circle") {
    const auto m = make_circle(512, 1.0);
    const auto F = WeightField::constant(m.size(), 1.0);
    const auto w = weyl_coefficient(m, riesz_kernel(2, 0.5), F);
    CHECK(w.sigma_w == doctest::Approx(2.0));
    CHECK(w.A_plus == doctest::Approx(4 * pi).epsilon(1e-12));
    CHECK(w.A_minus == 0.0);
    CHECK(w.A_plus_paper / w.A_plus_canonical == doctest::Approx(2 * pi).epsilon(1e-12));

    // Direct count of the closed-form circle eigenvalues: n(lambda) lambda^2 -> 4 pi.
    const double lambda = 0.05;
    long count = 0;
    for (long n = -20000; n <= 20000; ++n) count += oracle::circle_closed_form(0.5, n) > lambda;
    CHECK(count * lambda * lambda == doctest::Approx(4 * pi).epsilon(0.01));

    const cplx c(0.6, 0.8 * 1.5);
    const auto wc = weyl_coefficient(m, riesz_kernel(2, 0.5), F.scaled(c));
    CHECK(wc.A_plus == doctest::Approx(std::pow(std::abs(c), 2 * w.sigma_w) * w.A_plus).epsilon(1e-12));

    const auto neg = weyl_coefficient(m, riesz_kernel(2, 0.5, Coefficient::constant(-1.0)), F);
    CHECK(neg.A_minus == doctest::Approx(w.A_plus).epsilon(1e-14));
    CHECK(neg.A_plus == doctest::Approx(w.A_minus).epsilon(1e-14));

    const auto k2 = riesz_kernel(2, 0.5, Coefficient::constant(Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(2, 2))));
    const auto w2 = weyl_coefficient(m, k2, WeightField::identity(m.size(), 2));
    CHECK(w2.A_plus == doctest::Approx(2 * w.A_plus).epsilon(1e-12));
}

TEST_CASE("Weyl coefficient errors") {
    const auto dust = make_cantor(4, 0.25, 2, 2);
    CHECK_THROWS_AS(weyl_coefficient(dust, riesz_kernel(2, 0.5), WeightField::constant(dust.size(), 1.0)), ValidationError);
    const auto m = make_circle(64, 1.0);
    KernelTerm t = KernelTerm::riesz(-0.5, Coefficient::constant(1.0));
    t.angular = [](Point u) { return 1.0 + 0.5 * u[0] * u[0]; };
    const KernelSpec k(2, 1, {t}, true);
    CHECK_THROWS_AS(weyl_coefficient(m, k, WeightField::constant(m.size(), 1.0)), ValidationError);
}

TEST_CASE("matrix density") {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
    d(0, 0) = 2.0, d(1, 1) = -3.0;
    const auto [plus, minus] = matrix_density(d, 2.0);
    CHECK(plus == doctest::Approx(4.0));
    CHECK(minus == doctest::Approx(9.0));
}

TEST_CASE("circle oracle") {
    for (const auto& row : oracle::kCircle)
        for (long n = 0; n <= 5; ++n) {
            CHECK(circle_fourier_coefficient(row.theta, n) == doctest::Approx(row.g[n]).epsilon(1e-9));
            CHECK(circle_fourier_coefficient(row.theta, -n) == circle_fourier_coefficient(row.theta, n));
        }
    CHECK(circle_fourier_coefficient(0.5, 200) == doctest::Approx(oracle::circle_closed_form(0.5, 200)).epsilon(1e-9));
    CHECK(circle_fourier_coefficient(0.0, 0) == doctest::Approx(2 * pi).epsilon(1e-12));
    for (long n = 1; n <= 4; ++n) CHECK(std::abs(circle_fourier_coefficient(0.0, n)) <= 1e-12);
    const auto o = circle_oracle(0.5, 8);
    CHECK(o.c_inf == doctest::Approx(std::sqrt(2 * pi)).epsilon(1e-6));
    CHECK(o.eigenvalues().size() == 17);
    CHECK(circle_fourier_coefficient(0.0, 3, OracleKernel::log) == doctest::Approx(pi / 3).epsilon(1e-9));
    CHECK_THROWS_AS(circle_oracle(1.0, 4), ValidationError);
}
