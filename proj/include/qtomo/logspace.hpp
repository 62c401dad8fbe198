#pragma once

#include <cmath>
#include <limits>

namespace qtomo {

inline constexpr double kNegInfinity = -std::numeric_limits<double>::infinity();

inline double log_binomial(long long n, long long k) {
    if (k < 0 || k > n) return kNegInfinity;
    return std::lgamma(static_cast<double>(n + 1)) -
           std::lgamma(static_cast<double>(k + 1)) -
           std::lgamma(static_cast<double>(n - k + 1));
}

inline double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// x * log(p) with the 0 * log(0) = 0 convention; -inf when x > 0 and p <= 0.
inline double xlogp(double x, double p) {
    if (x == 0.0) return 0.0;
    if (p <= 0.0) return kNegInfinity;
    return x * std::log(p);
}

// Sum of signed terms given as (log|t|, sign), rescaled online against the
// running maximum with Kahan compensation. Tracks the cancellation ratio
// sum|t| / |sum t| so callers can detect precision loss.
class SignedLogAccumulator {
public:
    void add(double log_abs, int sign) {
        if (sign == 0 || log_abs == kNegInfinity) return;
        if (log_abs > max_log_) {
            const double f = std::exp(max_log_ - log_abs);
            pos_ *= f;
            pos_c_ *= f;
            neg_ *= f;
            neg_c_ *= f;
            max_log_ = log_abs;
        }
        const double v = std::exp(log_abs - max_log_);
        if (sign > 0)
            kahan(pos_, pos_c_, v);
        else
            kahan(neg_, neg_c_, v);
    }

    int sign() const {
        const double d = pos_ - neg_;
        return d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    }

    double log_abs() const {
        const double d = std::abs(pos_ - neg_);
        return d > 0.0 ? max_log_ + std::log(d) : kNegInfinity;
    }

    double value() const {
        return sign() * std::exp(log_abs());
    }

    double cancellation() const {
        const double d = std::abs(pos_ - neg_);
        if (pos_ + neg_ == 0.0) return 1.0;
        return d > 0.0 ? (pos_ + neg_) / d : std::numeric_limits<double>::infinity();
    }

private:
    static void kahan(double& sum, double& comp, double v) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }

    double max_log_ = kNegInfinity;
    double pos_ = 0.0, pos_c_ = 0.0;
    double neg_ = 0.0, neg_c_ = 0.0;
};

}  // namespace qtomo
