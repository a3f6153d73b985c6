#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "sspectra/assembly.hpp"
#include "sspectra/error.hpp"
#include "sspectra/powerfit.hpp"
#include "sspectra/spectra.hpp"

using namespace sspectra;

namespace {

SingularMeasure two_atoms() {
    SingularMeasure m;
    m.ambient_dim = 2;
    m.kind = MeasureKind::lebesgue_cube;
    m.points = Eigen::MatrixXd::Zero(2, 2);
    m.points(0, 1) = 1.0;
    m.weights = Eigen::Vector2d(0.5, 0.5);
    m.diameter = 1.0;
    return m;
}

WeightField random_weights(const SingularMeasure& m, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<cplx> v;
    for (std::size_t i = 0; i < m.size(); ++i) v.emplace_back(g(rng), g(rng));
    return WeightField(m.size(), 1, v, "random");
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b, double scale) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d / scale;
}

}  // namespace

TEST_CASE("two atoms at unit distance") {
    const auto m = two_atoms();
    const auto F = WeightField::constant(2, 1.0);
    const auto a = assemble(m, riesz_kernel(2, 1.0), F, F.adjoint(), DiagonalRule::zero);
    CHECK(a.hermitian);
    CHECK(a.entries(0, 1).real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(a.entries(1, 0).real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(a.entries(0, 0) == cplx(0.0));
    const auto s = hermitian_eigen(a);
    CHECK(s.values[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s.values[1] == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("bilinearity of the weights") {
    const auto m = make_circle(96, 1.0);
    const auto k = riesz_kernel(2, 0.5);
    const auto F1 = random_weights(m, 1), F2 = random_weights(m, 2);
    const cplx c(1.5, -2.0);
    const auto base = singular_values(assemble(m, k, F1, F2, DiagonalRule::ball_average));
    const auto left = singular_values(assemble(m, k, F1.scaled(c), F2, DiagonalRule::ball_average));
    std::vector<double> want;
    for (double v : base.values) want.push_back(std::abs(c) * v);
    CHECK(max_rel_diff(left.values, want, want[0]) <= 1e-12);

    const auto hb = singular_values(assemble(m, k, F1, F1.adjoint(), DiagonalRule::ball_average));
    const auto Fc = F1.scaled(c);
    const auto hc = singular_values(assemble(m, k, Fc, Fc.adjoint(), DiagonalRule::ball_average));
    want.clear();
    for (double v : hb.values) want.push_back(std::norm(c) * v);
    CHECK(max_rel_diff(hc.values, want, want[0]) <= 1e-12);
}

TEST_CASE("circle matrix reproduces the Fourier coefficients") {
    const auto m = make_circle(256, 1.0);
    const auto F = WeightField::constant(m.size(), 1.0);
    const auto a = assemble(m, riesz_kernel(2, 0.5), F, F.adjoint(), DiagonalRule::ball_average);
    REQUIRE(a.hermitian);
    CHECK((a.entries - a.entries.adjoint()).cwiseAbs().maxCoeff() <= 1e-13 * a.entries.cwiseAbs().maxCoeff());
    const auto s = hermitian_eigen(a);
    const double g[] = {oracle::kCircle[1].g[0], oracle::kCircle[1].g[1], oracle::kCircle[1].g[1], oracle::kCircle[1].g[2],
                        oracle::kCircle[1].g[2]};
    for (int i = 0; i < 5; ++i) CHECK(std::abs(s.values[i] - g[i]) <= 0.02 * g[i]);
}

TEST_CASE("diagonal values") {
    const auto m = make_circle(2048, 1.0);
    const auto k = riesz_kernel(2, 0.5);
    const double h = m.resolution;
    CHECK(ball_radius(m, 7, diagonal_context(m)) == doctest::Approx(h / 2).epsilon(1e-14));
    CHECK(diagonal_value(DiagonalRule::ball_average, m, 7, k)(0, 0).real() ==
          doctest::Approx(2.0 * std::pow(h / 2, -0.5)).epsilon(1e-13));
    CHECK(diagonal_value(DiagonalRule::zero, m, 7, k)(0, 0) == cplx(0.0));
    CHECK(diagonal_value(DiagonalRule::zero, make_cantor(3, 0.3, 1, 1), 0, riesz_kernel(1, 0.9))(0, 0) == cplx(0.0));
    CHECK_THROWS_AS(diagonal_value(DiagonalRule::ball_average, m, 0, riesz_kernel(2, 1.0)), ValidationError);
}

TEST_CASE("diagonal rules agree on the fitted exponent" * doctest::should_fail()) {
    // Expected to fail: the zero rule drops a diagonal of size ~h^-1/2, which dominates the fit window.
    const auto m = make_circle(2048, 1.0);
    const auto F = WeightField::constant(m.size(), 1.0);
    const auto k = riesz_kernel(2, 0.5);
    const auto ball = fit_power_law(hermitian_eigen(assemble(m, k, F, F, DiagonalRule::ball_average)), Sign::plus);
    const auto zero = fit_power_law(hermitian_eigen(assemble(m, k, F, F, DiagonalRule::zero)), Sign::plus);
    MESSAGE("p_hat ball_average = " << ball.p_hat << ", zero = " << zero.p_hat);
    CHECK(std::abs(ball.p_hat - zero.p_hat) <= 0.05);
}

TEST_CASE("assembly errors") {
    const auto m = make_circle(32, 1.0);
    const auto k = riesz_kernel(2, 0.5);
    const auto F = WeightField::constant(32, 1.0);
    CHECK_THROWS_AS(assemble(m, k, WeightField::constant(31, 1.0), F, DiagonalRule::zero), ValidationError);
    CHECK_THROWS_AS(assemble(m, riesz_kernel(3, 0.5), F, F, DiagonalRule::zero), ValidationError);
    auto nan_amp = Coefficient::callable(
        [](Point x, Point) { return Eigen::MatrixXcd::Constant(1, 1, x[0] > 0.99 ? cplx(NAN, 0.0) : cplx(1.0, 0.0)); }, 1, "nan");
    CHECK_THROWS_AS(assemble(m, riesz_kernel(2, 0.5, nan_amp, true), F, F, DiagonalRule::zero), NumericalError);
    CHECK_THROWS_AS(assemble(m, riesz_kernel(2, 1.5), F, F, DiagonalRule::ball_average), ValidationError);
}

TEST_CASE("matrix-valued weights and kernels") {
    const auto m = make_circle(40, 1.0);
    const auto k = riesz_kernel(2, 0.5, Coefficient::constant(Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(2, 2))));
    const auto F = WeightField::identity(m.size(), 2);
    const auto big = hermitian_eigen(assemble(m, k, F, F.adjoint(), DiagonalRule::ball_average));
    const auto Fs = WeightField::constant(m.size(), 1.0);
    const auto small = hermitian_eigen(assemble(m, riesz_kernel(2, 0.5), Fs, Fs, DiagonalRule::ball_average));
    REQUIRE(big.size() == 2 * small.size());
    for (std::size_t i = 0; i < small.size(); ++i) {
        CHECK(big.values[2 * i] == doctest::Approx(small.values[i]).epsilon(1e-12));
        CHECK(big.values[2 * i + 1] == doctest::Approx(small.values[i]).epsilon(1e-12));
    }
}

TEST_CASE("matrix file round trip is bit exact") {
    const auto m = make_circle(50, 1.0);
    const auto F = random_weights(m, 9);
    const auto a = assemble(m, riesz_kernel(2, 0.5), F, F.adjoint(), DiagonalRule::ball_average);
    const auto path = std::filesystem::temp_directory_path() / "sspectra_rt_matrix.bin";
    write_matrix(path, a);
    const auto b = read_matrix(path);
    CHECK(b.hermitian == a.hermitian);
    CHECK(b.entries == a.entries);
    CHECK(b.provenance.measure == a.provenance.measure);
    CHECK(b.provenance.diagonal_rule == "ball_average");
    std::filesystem::remove(path);
    std::filesystem::remove(path.string() + ".json");
}
