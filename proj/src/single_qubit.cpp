#include "qtomo/single_qubit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qtomo/logspace.hpp"
#include "qtomo/mle.hpp"
#include "qtomo/sampler.hpp"

namespace qtomo {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLn2 = std::numbers::ln2;

double wrap_two_pi(double phi) {
    double y = std::fmod(phi, kTwoPi);
    if (y < 0.0) y += kTwoPi;
    return y;
}

}  // namespace

void IdealCounts::validate() const {
    for (long long c : {c_h, c_v, c_d, c_a, c_l, c_r})
        if (c < 0) throw std::invalid_argument("IdealCounts: negative count");
}

void IdealCounts::require_positive_totals() const {
    validate();
    if (c_h + c_v <= 0 || nd() <= 0 || nc() <= 0)
        throw std::domain_error("IdealCounts: a basis total is zero, estimate undefined");
}

double single_qubit_log_likelihood(double u, double theta, double phi,
                                   const IdealCounts& counts) {
    const double ph = std::cos(u) * std::cos(u);
    const double w = std::sin(2.0 * u) * std::cos(theta);
    const double pd = 0.5 * (1.0 + w * std::cos(phi));
    const double pl = 0.5 * (1.0 + w * std::sin(phi));
    return xlogp(static_cast<double>(counts.c_h), ph) +
           xlogp(static_cast<double>(counts.c_v), 1.0 - ph) +
           xlogp(static_cast<double>(counts.c_d), pd) +
           xlogp(static_cast<double>(counts.c_a), 1.0 - pd) +
           xlogp(static_cast<double>(counts.c_l), pl) +
           xlogp(static_cast<double>(counts.c_r), 1.0 - pl);
}

LieEstimate lie_estimate(const IdealCounts& counts) {
    counts.require_positive_totals();
    LieEstimate est;
    est.bloch.z = static_cast<double>(counts.c_h - counts.c_v) / (counts.c_h + counts.c_v);
    est.bloch.x = static_cast<double>(counts.c_d - counts.c_a) / counts.nd();
    est.bloch.y = static_cast<double>(counts.c_l - counts.c_r) / counts.nc();
    est.physical = est.bloch.norm() <= 1.0;
    return est;
}

SingleQubitMle mle_single_qubit(const IdealCounts& counts) {
    const LieEstimate lie = lie_estimate(counts);
    const double z = lie.bloch.z, x = lie.bloch.x, y = lie.bloch.y;

    SingleQubitMle out;
    if (lie.physical) {
        out.on_boundary = false;
        out.bloch = lie.bloch;
        HypersphericalParams tau = HypersphericalParams::zeros(2);
        tau.u[0] = std::acos(std::clamp(z, -1.0, 1.0)) / 2.0;
        const double denom = 1.0 - z * z;
        if (denom > 0.0) {
            tau.theta[0] =
                std::acos(std::clamp(std::sqrt((x * x + y * y) / denom), 0.0, 1.0));
            tau.phi[0] = (x == 0.0 && y == 0.0) ? 0.0 : wrap_two_pi(std::atan2(y, x));
        } else {
            // Pole state: the off-diagonal vanishes, theta/phi unidentified.
            tau.theta[0] = kHalfPi;
            tau.phi[0] = 0.0;
        }
        out.tau = tau;
        out.log_likelihood =
            single_qubit_log_likelihood(tau.u[0], tau.theta[0], tau.phi[0], counts);
        return out;
    }

    // Unphysical LIE: the maximum sits on the Bloch-sphere surface. Restrict
    // to theta = 0 and maximize over (u, phi), multistarting in phi.
    std::vector<ParamSpec> box(2);
    box[0] = {"u", 0.0, kHalfPi, false, 0.0};
    box[1] = {"phi", 0.0, kTwoPi, true, 0.0};
    auto target = [&counts](std::span<const double> v) {
        return single_qubit_log_likelihood(v[0], 0.0, v[1], counts);
    };
    const double u_start = std::acos(std::clamp(z, -1.0, 1.0)) / 2.0;

    AscentConfig config;
    double best_value = kNegInfinity;
    double best_u = u_start, best_phi = 0.0;
    for (int j = 0; j < 8; ++j) {
        Rng rng = Rng::derive(0, {kMleStream, static_cast<std::uint64_t>(j)});
        const double phi_start = j * kTwoPi / 8.0;
        auto result = gradient_ascent(target, {u_start, phi_start}, box, config, rng);
        const double phi_found = wrap_two_pi(result.x[1]);
        const bool better =
            result.value > best_value + 1e-12 ||
            (std::abs(result.value - best_value) <= 1e-12 && phi_found < best_phi);
        if (better) {
            best_value = result.value;
            best_u = result.x[0];
            best_phi = phi_found;
        }
    }

    out.on_boundary = true;
    HypersphericalParams tau = HypersphericalParams::zeros(2);
    tau.u[0] = best_u;
    tau.theta[0] = 0.0;
    tau.phi[0] = best_phi;
    out.tau = tau;
    out.bloch.z = std::cos(2.0 * best_u);
    out.bloch.x = std::sin(2.0 * best_u) * std::cos(best_phi);
    out.bloch.y = std::sin(2.0 * best_u) * std::sin(best_phi);
    out.log_likelihood = best_value;
    return out;
}

LaplaceReport laplace_approximation(const IdealCounts& counts) {
    const SingleQubitMle mle = mle_single_qubit(counts);
    if (mle.on_boundary)
        throw std::domain_error(
            "laplace_approximation: MLE on the Bloch boundary, Hessian undefined");

    const double h = 1e-4;
    const std::array<double, 3> c{mle.tau.u[0], mle.tau.theta[0], mle.tau.phi[0]};
    auto f = [&](double du, double dt, double dp) {
        // The trig likelihood extends smoothly past the box, so probes are
        // evaluated unclamped.
        return single_qubit_log_likelihood(c[0] + du, c[1] + dt, c[2] + dp, counts);
    };
    auto probe = [&](int i, double s) {
        return f(i == 0 ? s : 0.0, i == 1 ? s : 0.0, i == 2 ? s : 0.0);
    };

    LaplaceReport report{mle.tau, Eigen::Matrix3d::Zero(), Eigen::Matrix3d::Zero(), false};
    const double f0 = f(0, 0, 0);
    for (int i = 0; i < 3; ++i)
        report.hessian(i, i) = -(probe(i, h) - 2.0 * f0 + probe(i, -h)) / (h * h);
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            auto fij = [&](double si, double sj) {
                double d[3] = {0, 0, 0};
                d[i] = si;
                d[j] = sj;
                return f(d[0], d[1], d[2]);
            };
            const double v =
                -(fij(h, h) - fij(h, -h) - fij(-h, h) + fij(-h, -h)) / (4.0 * h * h);
            report.hessian(i, j) = report.hessian(j, i) = v;
        }

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(report.hessian);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    report.positive_definite = es.eigenvalues().minCoeff() > 1e-9 * scale;
    if (report.positive_definite) {
        report.covariance = report.hessian.inverse();
    } else {
        // Pseudo-inverse over the identified directions.
        Eigen::Vector3d inv = Eigen::Vector3d::Zero();
        for (int i = 0; i < 3; ++i)
            if (es.eigenvalues()(i) > 1e-9 * scale) inv(i) = 1.0 / es.eigenvalues()(i);
        report.covariance =
            es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
    }
    return report;
}

double beta_integral_halfpi(long long sin_pow, long long cos_pow) {
    if (sin_pow < 0 || cos_pow < 0)
        throw std::domain_error("beta_integral_halfpi: negative power");
    return 0.5 * std::exp(log_beta(0.5 * (1 + sin_pow), 0.5 * (1 + cos_pow)));
}

double beta_integral_2pi(long long sin_pow, long long cos_pow) {
    if (sin_pow < 0 || cos_pow < 0)
        throw std::domain_error("beta_integral_2pi: negative power");
    if (sin_pow % 2 != 0 || cos_pow % 2 != 0) return 0.0;
    return 2.0 * std::exp(log_beta(0.5 * (1 + sin_pow), 0.5 * (1 + cos_pow)));
}

// Signed log coefficients of (1+x)^p (1-x)^q; entry s is the x^s coefficient.
// Factoring out (1-x^2)^min(p,q) leaves a single alternating index, which is
// what limits cancellation for balanced counts. Each coefficient carries its
// own cancellation ratio so downstream error estimates stay honest.
std::vector<SignedLogCoefficient> signed_binomial_product(long long p, long long q) {
    const long long total = p + q;
    const long long m = std::min(p, q);
    const long long d = std::llabs(p - q);
    const bool excess_is_plus = p >= q;
    std::vector<SignedLogCoefficient> w(total + 1, {kNegInfinity, 0, 1.0});
    for (long long s = 0; s <= total; ++s) {
        SignedLogAccumulator acc;
        const long long j_lo = std::max<long long>(0, (s - d + 1) / 2);
        const long long j_hi = std::min(m, s / 2);
        for (long long j = j_lo; j <= j_hi; ++j) {
            int sign = (j % 2 == 0) ? 1 : -1;
            if (!excess_is_plus && (s - 2 * j) % 2 != 0) sign = -sign;
            acc.add(log_binomial(m, j) + log_binomial(d, s - 2 * j), sign);
        }
        w[s] = {acc.log_abs(), acc.sign(), acc.cancellation()};
    }
    return w;
}

BmeMomentTable::BmeMomentTable(const IdealCounts& counts) : counts_(counts) {
    counts.validate();
    const long long max_half =
        4 * counts.total() + 64;  // covers every lgamma(k/2) the sums touch
    lgamma_half_.resize(max_half + 1);
    lgamma_half_[0] = 0.0;  // unused
    for (long long k = 1; k <= max_half; ++k)
        lgamma_half_[k] = std::lgamma(0.5 * static_cast<double>(k));
    w_da_ = signed_binomial_product(counts.c_d, counts.c_a);
    w_lr_ = signed_binomial_product(counts.c_l, counts.c_r);
}

LogMoment BmeMomentTable::log_moment(int u0, int u1, int t0, int t1, int f0,
                                     int f1) const {
    const long long nd = counts_.nd();
    const long long nc = counts_.nc();
    const double log_const = 0.5 * std::log(8.0);  // 2 sqrt(2)

    SignedLogAccumulator acc;
    // Error budget: each term's own coefficients were already computed with
    // cancellation, so weight |term| by those ratios when estimating how many
    // digits the final sum can still carry.
    SignedLogAccumulator error_weight;
    for (long long s = 0; s <= nd; ++s) {
        if ((s + f0) % 2 != 0 || w_da_[s].sign == 0) continue;
        for (long long t = 0; t <= nc; ++t) {
            if ((t + f1) % 2 != 0 || w_lr_[t].sign == 0) continue;
            const long long M = s + t;
            const double lbeta_u = lg(4 + 2 * counts_.c_v + M + u1) +
                                   lg(4 + 2 * counts_.c_h + M + u0) -
                                   lg(8 + 2 * counts_.c_v + 2 * counts_.c_h + 2 * M + u0 + u1);
            const double lbeta_t =
                lg(2 + t1) + lg(2 + M + t0) - lg(4 + M + t0 + t1);
            const double lbeta_f =
                lg(1 + t + f1) + lg(1 + s + f0) - lg(2 + s + t + f0 + f1);
            const double log_term = w_da_[s].log_abs + w_lr_[t].log_abs +
                                    (M - nd - nc) * kLn2 + lbeta_u + lbeta_t +
                                    lbeta_f + log_const;
            acc.add(log_term, w_da_[s].sign * w_lr_[t].sign);
            error_weight.add(
                log_term + std::log(w_da_[s].cancellation + w_lr_[t].cancellation),
                1);
        }
    }
    double cancellation = 1.0;
    if (acc.sign() != 0)
        cancellation = std::exp(error_weight.log_abs() - acc.log_abs());
    else if (error_weight.sign() != 0)
        cancellation = std::numeric_limits<double>::infinity();
    return {acc.log_abs(), acc.sign(), cancellation};
}

double bme_moment_F(int u0, int u1, int t0, int t1, int f0, int f1,
                    const IdealCounts& counts) {
    const BmeMomentTable table(counts);
    const LogMoment m = table.log_moment(u0, u1, t0, t1, f0, f1);
    return m.sign * std::exp(m.log_abs);
}

namespace {

// Slice-sampled posterior mean of the same target, used where the sum
// representation is out of reach. Fixed seed; Monte-Carlo accuracy is a few
// parts in 10^3 on Bloch coordinates.
DensityMatrix bme_by_sampling(const IdealCounts& counts) {
    std::vector<ParamSpec> specs(3);
    specs[0] = {"u", 0.0, kHalfPi, false, 0.0};
    specs[1] = {"theta", 0.0, kHalfPi, false, 0.0};
    specs[2] = {"phi", 0.0, kTwoPi, true, 0.0};
    auto target = [&counts](std::span<const double> v) {
        const double measure =
            metric_determinant_sqrt(HypersphericalParams::from_flat(2, v));
        if (measure <= 0.0) return kNegInfinity;
        return single_qubit_log_likelihood(v[0], v[1], v[2], counts) +
               std::log(measure);
    };
    BurnInConfig config;
    config.k0 = 100;
    config.pooled_target = 8000;
    const PosteriorSamples samples = run_chains(target, specs, config, 0x51a9b3u);
    return posterior_mean_density(samples, 2);
}

// Estimated relative error eps * cancellation beyond which the summed
// moments cannot be trusted for the state invariants.
constexpr double kCancellationLimit = 1e10;

}  // namespace

SingleQubitBme bme_closed_form_detailed(const IdealCounts& counts) {
    counts.validate();

    if (counts.total() > 5000) {
        // The quadruple sum grows as the product of the X/Y counts.
        return {bme_by_sampling(counts), 1.0, false, true};
    }

    const BmeMomentTable table(counts);
    const LogMoment f_norm = table.log_moment(0, 0, 0, 0, 0, 0);
    const LogMoment f_cos2 = table.log_moment(2, 0, 0, 0, 0, 0);
    const LogMoment f_sin2 = table.log_moment(0, 2, 0, 0, 0, 0);
    const LogMoment f_re = table.log_moment(1, 1, 1, 0, 1, 0);
    const LogMoment f_im = table.log_moment(1, 1, 1, 0, 0, 1);

    double max_cancellation = 1.0;
    for (const LogMoment* lm : {&f_norm, &f_cos2, &f_sin2, &f_re, &f_im})
        max_cancellation = std::max(max_cancellation, lm->cancellation);

    // The alternating binomial re-expansion cancels catastrophically once the
    // X/Y counts grow; when the summed digits are gone (including, at some
    // point, the sign of the normalization) estimate by sampling instead.
    if (f_norm.sign <= 0 || max_cancellation > kCancellationLimit)
        return {bme_by_sampling(counts), max_cancellation, true, true};

    auto ratio = [&](const LogMoment& m) {
        return m.sign * std::exp(m.log_abs - f_norm.log_abs);
    };
    const double r00 = ratio(f_cos2);
    const double r11 = ratio(f_sin2);
    const Complex lower(ratio(f_re), ratio(f_im));

    Matrix m(2, 2);
    m(0, 0) = r00;
    m(1, 1) = r11;
    m(1, 0) = lower;
    m(0, 1) = std::conj(lower);
    m /= m.trace();  // exact unit trace is implied; renormalize the residual

    const bool warn =
        max_cancellation * std::numeric_limits<double>::epsilon() > 1e-8;
    return {DensityMatrix::from_matrix(std::move(m)), max_cancellation, warn, false};
}

DensityMatrix bme_closed_form(const IdealCounts& counts) {
    return bme_closed_form_detailed(counts).rho;
}

}  // namespace qtomo
