#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qtomo/density.hpp"
#include "qtomo/rng.hpp"

#include "oracles.hpp"

using namespace qtomo;

namespace {

constexpr double kPi = std::numbers::pi;

HypersphericalParams random_params(int n, Rng& rng) {
    HypersphericalParams tau = HypersphericalParams::zeros(n);
    for (auto& v : tau.u) v = rng.uniform(0.0, kPi / 2.0);
    for (auto& v : tau.theta) v = rng.uniform(0.0, kPi / 2.0);
    for (auto& v : tau.phi) v = rng.uniform(0.0, 2.0 * kPi);
    return tau;
}

HypersphericalParams tau2(double u, double theta, double phi) {
    HypersphericalParams tau = HypersphericalParams::zeros(2);
    tau.u[0] = u;
    tau.theta[0] = theta;
    tau.phi[0] = phi;
    return tau;
}

// The explicit two-qubit factor, written out element by element.
Matrix explicit_factor_n4(const HypersphericalParams& t) {
    const double u1 = t.u[0], u2 = t.u[1], u3 = t.u[2];
    const double t21 = t.theta[0], t31 = t.theta[1], t32 = t.theta[2];
    const double t41 = t.theta[3], t42 = t.theta[4], t43 = t.theta[5];
    auto e = [](double phi) { return Complex(std::cos(phi), std::sin(phi)); };
    const Complex e21 = e(t.phi[0]), e31 = e(t.phi[1]), e32 = e(t.phi[2]);
    const Complex e41 = e(t.phi[3]), e42 = e(t.phi[4]), e43 = e(t.phi[5]);
    using std::cos;
    using std::sin;
    Matrix L = Matrix::Zero(4, 4);
    L(0, 0) = cos(u1);
    L(1, 0) = sin(u1) * cos(u2) * cos(t21) * e21;
    L(1, 1) = sin(u1) * cos(u2) * sin(t21);
    L(2, 0) = sin(u1) * sin(u2) * cos(u3) * cos(t31) * e31;
    L(2, 1) = sin(u1) * sin(u2) * cos(u3) * sin(t31) * cos(t32) * e32;
    L(2, 2) = sin(u1) * sin(u2) * cos(u3) * sin(t31) * sin(t32);
    L(3, 0) = sin(u1) * sin(u2) * sin(u3) * cos(t41) * e41;
    L(3, 1) = sin(u1) * sin(u2) * sin(u3) * sin(t41) * cos(t42) * e42;
    L(3, 2) = sin(u1) * sin(u2) * sin(u3) * sin(t41) * sin(t42) * cos(t43) * e43;
    L(3, 3) = sin(u1) * sin(u2) * sin(u3) * sin(t41) * sin(t42) * sin(t43);
    return L;
}

double haar_measure_n2(double u, double theta) {
    return std::pow(std::sin(2.0 * u), 3) * std::sin(2.0 * theta) /
           (2.0 * std::sqrt(2.0));
}

}  // namespace

TEST_CASE("parameter shapes and ranges") {
    CHECK(HypersphericalParams::param_count(2) == 3);
    CHECK(HypersphericalParams::param_count(4) == 15);

    auto tau = HypersphericalParams::zeros(4);
    CHECK(tau.u.size() == 3);
    CHECK(tau.theta.size() == 6);
    CHECK(tau.phi.size() == 6);
    CHECK_NOTHROW(tau.validate());

    tau.u[0] = kPi;  // out of range
    CHECK_THROWS_AS(tau.validate(), std::invalid_argument);

    Rng rng(7);
    auto t4 = random_params(4, rng);
    const auto flat = t4.flatten();
    CHECK(flat.size() == 15);
    const auto back = HypersphericalParams::from_flat(4, flat);
    CHECK(back.u == t4.u);
    CHECK(back.theta == t4.theta);
    CHECK(back.phi == t4.phi);
    CHECK_THROWS_AS(HypersphericalParams::from_flat(2, flat), std::invalid_argument);
}

TEST_CASE("cholesky factor: u = 0 collapses to |0><0|") {
    const Matrix L = cholesky_factor(tau2(0.0, 0.3, 1.2));
    CHECK(std::abs(L(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(L(1, 0)) < 1e-15);
    CHECK(std::abs(L(1, 1)) < 1e-15);
}

TEST_CASE("cholesky factor: u = pi/4, theta = 0") {
    const Matrix L = cholesky_factor(tau2(kPi / 4.0, 0.0, 0.0));
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(L(0, 0) - r) < 1e-15);
    CHECK(std::abs(L(1, 0) - r) < 1e-15);
    CHECK(std::abs(L(1, 1)) < 1e-15);
    CHECK(std::abs(L(0, 1)) < 1e-15);
}

TEST_CASE("cholesky factor: n=4 unit trace and explicit elements") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto tau = random_params(4, rng);
        const Matrix L = cholesky_factor(tau);
        CHECK((L * L.adjoint()).trace().real() == doctest::Approx(1.0).epsilon(1e-12));
        const Matrix ref = explicit_factor_n4(tau);
        CHECK((L - ref).cwiseAbs().maxCoeff() < 1e-12);
        for (int i = 0; i < 4; ++i) {
            CHECK(L(i, i).imag() == 0.0);
            CHECK(L(i, i).real() >= 0.0);
        }
    }
}

TEST_CASE("density matrix closed form for n=2") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const double u = rng.uniform(0.0, kPi / 2.0);
        const double th = rng.uniform(0.0, kPi / 2.0);
        const double ph = rng.uniform(0.0, 2.0 * kPi);
        const Matrix rho = density_from_params(tau2(u, th, ph)).matrix();
        CHECK(rho(0, 0).real() ==
              doctest::Approx(std::cos(u) * std::cos(u)).epsilon(1e-12));
        CHECK(rho(1, 1).real() ==
              doctest::Approx(std::sin(u) * std::sin(u)).epsilon(1e-12));
        const double mag = 0.5 * std::cos(th) * std::sin(2.0 * u);
        CHECK(std::abs(rho(1, 0) - mag * Complex(std::cos(ph), std::sin(ph))) < 1e-12);
        CHECK(std::abs(rho(0, 1) - std::conj(rho(1, 0))) < 1e-15);
    }
}

TEST_CASE("density at the poles") {
    const Matrix bottom = density_from_params(tau2(kPi / 2.0, 0.7, 0.2)).matrix();
    CHECK(std::abs(bottom(0, 0)) < 1e-15);
    CHECK(std::abs(bottom(1, 1) - 1.0) < 1e-15);
}

TEST_CASE("n=4 maximally mixed point") {
    HypersphericalParams tau = HypersphericalParams::zeros(4);
    tau.u = {std::acos(0.5), std::acos(1.0 / std::sqrt(3.0)), kPi / 4.0};
    tau.theta.assign(6, kPi / 2.0);
    tau.phi.assign(6, 0.0);
    const Matrix rho = density_from_params(tau).matrix();
    CHECK((rho - Matrix::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("density invariants hold across the parameter box") {
    Rng rng(5);
    for (int n : {2, 4}) {
        for (int trial = 0; trial < 10000; ++trial) {
            const auto rho = density_from_params(random_params(n, rng));
            CHECK_NOTHROW(rho.validate());
        }
    }
}

TEST_CASE("pauli expectations match the closed trig forms") {
    Rng rng(13);
    for (int trial = 0; trial < 1000; ++trial) {
        const double u = rng.uniform(0.0, kPi / 2.0);
        const double th = rng.uniform(0.0, kPi / 2.0);
        const double ph = rng.uniform(0.0, 2.0 * kPi);
        const BlochVector b = pauli_expectations(density_from_params(tau2(u, th, ph)));
        CHECK(b.z == doctest::Approx(std::cos(2 * u)).epsilon(1e-10));
        CHECK(b.x ==
              doctest::Approx(std::sin(2 * u) * std::cos(th) * std::cos(ph))
                  .epsilon(1e-10));
        CHECK(b.y ==
              doctest::Approx(std::sin(2 * u) * std::cos(th) * std::sin(ph))
                  .epsilon(1e-10));
    }

    const auto id = DensityMatrix::from_matrix(Matrix::Identity(2, 2) / 2.0);
    const BlochVector center = pauli_expectations(id);
    CHECK(std::abs(center.z) < 1e-15);
    CHECK(std::abs(center.x) < 1e-15);
    CHECK(std::abs(center.y) < 1e-15);

    Matrix ket0 = Matrix::Zero(2, 2);
    ket0(0, 0) = 1.0;
    const BlochVector up = pauli_expectations(DensityMatrix::from_matrix(ket0));
    CHECK(up.z == doctest::Approx(1.0));
    CHECK(std::abs(up.x) < 1e-15);
    CHECK(std::abs(up.y) < 1e-15);

    CHECK_THROWS_AS(pauli_expectations(DensityMatrix::from_matrix(
                        Matrix::Identity(4, 4) / 4.0)),
                    std::invalid_argument);
}

TEST_CASE("reference state from the angle example") {
    // Angles quoted to three digits; coordinates only match to that rounding.
    const BlochVector b =
        pauli_expectations(density_from_params(tau2(0.864, 0.393, 5.18)));
    CHECK(b.z == doctest::Approx(-0.156).epsilon(0.01));
    CHECK(b.x == doctest::Approx(0.414).epsilon(0.02));
    CHECK(b.y == doctest::Approx(-0.813).epsilon(0.01));
    CHECK(b.norm() == doctest::Approx(0.925).epsilon(0.002));
}

TEST_CASE("trace distance") {
    const auto mixed = DensityMatrix::from_matrix(Matrix::Identity(2, 2) / 2.0);
    Matrix k0 = Matrix::Zero(2, 2), k1 = Matrix::Zero(2, 2);
    k0(0, 0) = 1.0;
    k1(1, 1) = 1.0;
    const auto zero = DensityMatrix::from_matrix(k0);
    const auto one = DensityMatrix::from_matrix(k1);

    CHECK(trace_distance(zero, zero) == doctest::Approx(0.0));
    CHECK(trace_distance(zero, one) == doctest::Approx(1.0));
    CHECK(trace_distance(mixed, zero) == doctest::Approx(0.5));
    CHECK_THROWS_AS(trace_distance(
                        zero, DensityMatrix::from_matrix(Matrix::Identity(4, 4) / 4.0)),
                    std::invalid_argument);

    // Triangle inequality and symmetry on random states.
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = density_from_params(random_params(2, rng));
        const auto b = density_from_params(random_params(2, rng));
        const auto c = density_from_params(random_params(2, rng));
        const double ab = trace_distance(a, b);
        const double ba = trace_distance(b, a);
        const double bc = trace_distance(b, c);
        const double ac = trace_distance(a, c);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
        CHECK(ac <= ab + bc + 1e-10);
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0 + 1e-12);
    }
}

TEST_CASE("fidelity with a pure target") {
    CVector psi(2);
    psi << Complex(1.0 / std::sqrt(2.0), 0.0), Complex(0.5, 0.5);
    const Matrix proj = psi * psi.adjoint();
    CHECK(fidelity_with_pure(DensityMatrix::from_matrix(proj), psi) ==
          doctest::Approx(1.0).epsilon(1e-12));

    CVector bell(4);
    bell << 0.0, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
    CHECK(fidelity_with_pure(DensityMatrix::from_matrix(Matrix::Identity(4, 4) / 4.0),
                             bell) == doctest::Approx(0.5).epsilon(1e-12));

    CVector unnormalized(2);
    unnormalized << 1.0, 1.0;
    CHECK_THROWS_AS(fidelity_with_pure(
                        DensityMatrix::from_matrix(Matrix::Identity(2, 2) / 2.0),
                        unnormalized),
                    std::invalid_argument);
}

TEST_CASE("finite-difference measure matches the closed form for n=2") {
    // 5x5 interior spot check; the acceptance suite runs the full 20x20 grid.
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            const double u = 0.15 + (kPi / 2.0 - 0.3) * i / 4.0;
            const double th = 0.15 + (kPi / 2.0 - 0.3) * j / 4.0;
            const double got = metric_determinant_sqrt(tau2(u, th, 0.7));
            const double want = haar_measure_n2(u, th);
            CHECK(got == doctest::Approx(want).epsilon(1e-6));
        }
}

TEST_CASE("measure vanishes where the parametrization degenerates") {
    CHECK(metric_determinant_sqrt(tau2(0.0, 0.3, 0.1)) == doctest::Approx(0.0));
    CHECK(metric_determinant_sqrt(tau2(kPi / 4.0, kPi / 4.0, 0.0)) ==
          doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-6));
}

TEST_CASE("measure is positive in the n=4 interior") {
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        auto tau = HypersphericalParams::zeros(4);
        for (auto& v : tau.u) v = rng.uniform(0.2, kPi / 2.0 - 0.2);
        for (auto& v : tau.theta) v = rng.uniform(0.2, kPi / 2.0 - 0.2);
        for (auto& v : tau.phi) v = rng.uniform(0.0, 2.0 * kPi);
        CHECK(metric_determinant_sqrt(tau) > 0.0);
    }
}

TEST_CASE("density JSON round trip is exact") {
    Rng rng(29);
    const auto rho = density_from_params(random_params(4, rng));
    const auto back = density_from_json(density_to_json(rho));
    CHECK((rho.matrix() - back.matrix()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("haar samples: z symmetry and validity") {
    Rng rng(31);
    const auto samples = haar_uniform_samples(rng, 2, 20000);
    double z_sum = 0.0;
    for (const auto& tau : samples) z_sum += std::cos(2.0 * tau.u[0]);
    CHECK(std::abs(z_sum / samples.size()) < 0.01);

    Rng rng4(37);
    for (const auto& tau : haar_uniform_samples(rng4, 4, 50))
        CHECK_NOTHROW(density_from_params(tau).validate());
}

TEST_CASE("haar samples: distribution invariant under a fixed rotation") {
    Rng rng(41);
    const auto samples = haar_uniform_samples(rng, 2, 60000);
    // Thin the chain, then compare the z-coordinate of half the draws with a
    // rotated coordinate of the other half.
    std::vector<double> plain, rotated;
    for (std::size_t i = 0; i < samples.size(); i += 12) {
        const BlochVector b = pauli_expectations(density_from_params(samples[i]));
        if ((i / 12) % 2 == 0)
            plain.push_back(b.z);
        else
            rotated.push_back((b.x + b.y + b.z) / std::sqrt(3.0));
    }
    CHECK(oracles::ks_test_two_sample(plain, rotated) > 0.01);
}
