#pragma once

#include <Eigen/Dense>

#include "qtomo/density.hpp"

namespace qtomo {

// Counts from the ideal (lossless) single-qubit experiment: Z basis
// (horizontal/vertical), X basis (diagonal/anti-diagonal), Y basis
// (left/right circular).
struct IdealCounts {
    long long c_h = 0, c_v = 0, c_d = 0, c_a = 0, c_l = 0, c_r = 0;

    long long nd() const { return c_d + c_a; }
    long long nc() const { return c_l + c_r; }
    long long total() const { return c_h + c_v + nd() + nc(); }

    void validate() const;                  // counts nonnegative
    void require_positive_totals() const;   // each basis total > 0
};

// Log of the parametrized likelihood p_h^c_h (1-p_h)^c_v ... at (u, theta, phi).
double single_qubit_log_likelihood(double u, double theta, double phi,
                                   const IdealCounts& counts);

// Frequency-based linear inversion: z = (c_h - c_v)/(c_h + c_v) etc.
// May be unphysical (Bloch norm > 1); `physical` flags that.
struct LieEstimate {
    BlochVector bloch;
    bool physical = true;
};
LieEstimate lie_estimate(const IdealCounts& counts);

// Maximum-likelihood estimate. Interior solution (the LIE mapped to angles)
// when the LIE is physical; otherwise the likelihood is maximized on the
// Bloch-sphere boundary (theta = 0) over (u, phi) by multistart gradient
// ascent from 8 evenly spaced phi starts.
struct SingleQubitMle {
    HypersphericalParams tau;
    BlochVector bloch;
    bool on_boundary = false;
    double log_likelihood = 0.0;
};
SingleQubitMle mle_single_qubit(const IdealCounts& counts);

// Saddle-point (Laplace) approximation at an interior MLE:
// A_ij = -d^2 log P(D|tau) / d tau_i d tau_j, central differences, h = 1e-4.
// Throws std::domain_error for a boundary MLE. A that is not positive
// definite (e.g. phi unidentifiable when theta_ml = pi/2) is flagged
// degenerate and the covariance falls back to the pseudo-inverse.
struct LaplaceReport {
    HypersphericalParams tau;
    Eigen::Matrix3d hessian;
    Eigen::Matrix3d covariance;
    bool positive_definite = false;
};
LaplaceReport laplace_approximation(const IdealCounts& counts);

// int_0^{pi/2} sin^x u cos^y u du = Beta((1+x)/2, (1+y)/2) / 2.
double beta_integral_halfpi(long long sin_pow, long long cos_pow);

// int_0^{2 pi} sin^x cos^y = (1+(-1)^x)(1+(-1)^y)/2 * Beta((1+x)/2, (1+y)/2);
// zero for odd x or y.
double beta_integral_2pi(long long sin_pow, long long cos_pow);

// Moments of the Haar-weighted single-qubit likelihood:
//   F = Int du dtheta dphi  measure * likelihood(D)
//       * cos^{u0}(u) sin^{u1}(u) cos^{t0}(theta) sin^{t1}(theta)
//       * cos^{f0}(phi) sin^{f1}(phi).
// Expanding the X/Y likelihood factors binomially reduces F to a finite
// signed sum of Beta-function products, grouped here by the total X-term
// and Y-term powers so the alternating factors collapse before evaluation.
// All arithmetic is done in log space with signed compensated accumulation.
struct LogMoment {
    double log_abs = 0.0;
    int sign = 0;
    double cancellation = 1.0;  // sum of |terms| over |result|
};

struct SignedLogCoefficient {
    double log_abs;
    int sign;
    double cancellation;  // of this coefficient's own inner sum
};

class BmeMomentTable {
public:
    explicit BmeMomentTable(const IdealCounts& counts);
    LogMoment log_moment(int u0, int u1, int t0, int t1, int f0, int f1) const;

private:
    double lg(long long twice) const { return lgamma_half_[twice]; }

    IdealCounts counts_;
    std::vector<double> lgamma_half_;           // lgamma(k/2)
    std::vector<SignedLogCoefficient> w_da_;    // signed log coefficients, X sums
    std::vector<SignedLogCoefficient> w_lr_;    // signed log coefficients, Y sums
};

// Convenience scalar form; underflows for very large count totals (use
// BmeMomentTable::log_moment for ratios in that regime).
double bme_moment_F(int u0, int u1, int t0, int t1, int f0, int f1,
                    const IdealCounts& counts);

// Closed-form Bayesian mean estimate of the single-qubit state,
//   rho_bar = < rho(tau) > under the posterior with the Haar prior.
// For count totals above 5000 the quadruple-sum evaluation is replaced by
// slice sampling of the same posterior (fixed internal seed; Monte-Carlo
// accuracy about +-0.01 on Bloch coordinates).
struct SingleQubitBme {
    DensityMatrix rho;
    double max_cancellation = 1.0;
    bool precision_warning = false;  // estimated relative loss beyond 1e-8
    bool sampled_fallback = false;
};
SingleQubitBme bme_closed_form_detailed(const IdealCounts& counts);
DensityMatrix bme_closed_form(const IdealCounts& counts);

}  // namespace qtomo
