#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qtomo/rng.hpp"

namespace qtomo {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Daboul angles of the lower-triangular factor L with rho = L L^dagger.
// u_i and theta_ij live in [0, pi/2]; phi_ij is cyclic on [0, 2*pi).
// An n-dimensional state takes n^2 - 1 parameters; any in-range values map
// to a valid density matrix, so samplers and optimizers can treat the
// parameter box as unconstrained.
struct HypersphericalParams {
    int n = 2;
    std::vector<double> u;      // size n-1
    std::vector<double> theta;  // (i,j) with 2 <= i <= n, j < i, row-major
    std::vector<double> phi;    // same shape as theta

    static HypersphericalParams zeros(int n);
    static int param_count(int n) { return n * n - 1; }
    int tri_count() const { return n * (n - 1) / 2; }

    // Flat layout: u..., theta..., phi... (matches param_names ordering).
    std::vector<double> flatten() const;
    static HypersphericalParams from_flat(int n, std::span<const double> x);
    static std::vector<std::string> param_names(int n);

    // Throws std::invalid_argument on shape or range violations.
    void validate() const;
};

struct BlochVector {
    double z = 0.0, x = 0.0, y = 0.0;
    double norm() const { return std::sqrt(z * z + x * x + y * y); }
};

// Hermitian, unit-trace, positive-semidefinite complex matrix.
class DensityMatrix {
public:
    static constexpr double kHermitianTol = 1e-12;
    static constexpr double kTraceTol = 1e-12;
    static constexpr double kEigenvalueFloor = -1e-10;

    // Validating constructor; throws std::invalid_argument.
    static DensityMatrix from_matrix(Matrix m);

    // For values that are valid by construction (e.g. L L^dagger, convex
    // mixtures of states). Invariants can still be audited via validate().
    static DensityMatrix unchecked(Matrix m) { return DensityMatrix(std::move(m)); }

    const Matrix& matrix() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }

    void validate() const;

private:
    explicit DensityMatrix(Matrix m) : m_(std::move(m)) {}
    Matrix m_;
};

// Lower-triangular Cholesky factor L(tau); diag(L) real nonnegative and
// trace(L L^dagger) = 1 for any in-range tau.
Matrix cholesky_factor(const HypersphericalParams& tau);

// rho(tau) = L(tau) L(tau)^dagger.
DensityMatrix density_from_params(const HypersphericalParams& tau);

// sqrt(det g) of the Riemannian metric g_ij = Tr(d rho/d tau_i * d rho/d tau_j)
// induced by (ds)^2 = Tr(d rho * d rho^dagger). Computed by central finite
// differences (h = 1e-6, probes clamped into range for non-cyclic angles).
// This is the Haar-invariant volume density in tau coordinates; it vanishes
// where the parametrization degenerates.
double metric_determinant_sqrt(const HypersphericalParams& tau);

// Same value, memoized per thread on the exact angle vector. Gibbs sweeps
// evaluate the posterior once per coordinate; conditionals that leave the
// state angles untouched reuse the previous measure.
double metric_determinant_sqrt_cached(std::span<const double> tau_flat, int n);

// (Tr(sigma_z rho), Tr(sigma_x rho), Tr(sigma_y rho)); 2x2 input only.
BlochVector pauli_expectations(const DensityMatrix& rho);

// D(rho, sigma) = (1/2) sum |eigenvalues of rho - sigma|, in [0, 1].
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

// sqrt(<psi| rho |psi>) for a normalized pure target |psi>.
double fidelity_with_pure(const DensityMatrix& rho, const CVector& psi);

// One draw from the Haar-invariant uniform distribution over states,
// i.e. tau with density proportional to metric_determinant_sqrt. Runs
// Gibbs slice-sampling sweeps on that target with a fixed burn-in.
HypersphericalParams haar_uniform_sample(Rng& rng, int n);

// Batch variant: burns in once and returns `count` consecutive sweep
// outputs from the same chain.
std::vector<HypersphericalParams> haar_uniform_samples(Rng& rng, int n, int count);

// JSON round trip: {"n": int, "re": [[...]], "im": [[...]]}, row-major.
std::string density_to_json(const DensityMatrix& rho);
DensityMatrix density_from_json(const std::string& text);

}  // namespace qtomo
