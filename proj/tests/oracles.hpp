#pragma once

// Test-only reference implementations: quadrature oracles, statistical
// tests, and brute-force enumerations. Nothing here may call the library
// code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace oracles {

// Gauss-Legendre nodes/weights on [a, b] by Newton iteration on P_n.
struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline Quadrature gauss_legendre(int n, double a, double b) {
    Quadrature q;
    q.nodes.resize(n);
    q.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pd = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pd = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pd;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * pd * pd);
        q.nodes[i] = x;
        q.weights[i] = w;
        q.nodes[n - 1 - i] = -x;
        q.weights[n - 1 - i] = w;
    }
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        q.nodes[i] = mid - half * q.nodes[i];
        q.weights[i] *= half;
    }
    return q;
}

inline double ipow(double x, long long e) {
    double r = 1.0;
    for (long long i = 0; i < e; ++i) r *= x;
    return r;
}

struct IdealCountsRef {
    long long c_h, c_v, c_d, c_a, c_l, c_r;
};

// Direct 3-d quadrature of the Haar-weighted single-qubit likelihood moment
//   Int du dtheta dphi measure * P(D|tau)
//     * cos^{u0} u sin^{u1} u cos^{t0} th sin^{t1} th cos^{f0} ph sin^{f1} ph
// with measure = sin^3(2u) sin(2 theta) / (2 sqrt 2). Gauss-Legendre in u and
// theta, uniform (periodic-exact) grid in phi. Suitable for small counts.
inline double single_qubit_moment_quadrature(const IdealCountsRef& c, int u0, int u1,
                                             int t0, int t1, int f0, int f1,
                                             int order = 64) {
    const auto qu = gauss_legendre(order, 0.0, std::numbers::pi / 2.0);
    const auto qt = gauss_legendre(order, 0.0, std::numbers::pi / 2.0);
    const int nphi = 2 * order;
    const double dphi = 2.0 * std::numbers::pi / nphi;

    double total = 0.0;
    for (int iu = 0; iu < order; ++iu) {
        const double u = qu.nodes[iu];
        const double su = std::sin(u), cu = std::cos(u);
        const double ph_prob = cu * cu;
        const double s2u = std::sin(2.0 * u);
        for (int it = 0; it < order; ++it) {
            const double th = qt.nodes[it];
            const double ct = std::cos(th), st = std::sin(th);
            const double measure = ipow(s2u, 3) * std::sin(2.0 * th) /
                                   (2.0 * std::sqrt(2.0));
            const double base = qu.weights[iu] * qt.weights[it] * measure *
                                ipow(ph_prob, c.c_h) * ipow(1.0 - ph_prob, c.c_v) *
                                ipow(cu, u0) * ipow(su, u1) * ipow(ct, t0) *
                                ipow(st, t1);
            if (base == 0.0) continue;
            double phi_sum = 0.0;
            for (int ip = 0; ip < nphi; ++ip) {
                const double ph = (ip + 0.5) * dphi;
                const double cp = std::cos(ph), sp = std::sin(ph);
                const double pd = 0.5 * (1.0 + s2u * ct * cp);
                const double pl = 0.5 * (1.0 + s2u * ct * sp);
                phi_sum += ipow(pd, c.c_d) * ipow(1.0 - pd, c.c_a) * ipow(pl, c.c_l) *
                           ipow(1.0 - pl, c.c_r) * ipow(cp, f0) * ipow(sp, f1);
            }
            total += base * phi_sum * dphi;
        }
    }
    return total;
}

// --- statistical tests ---------------------------------------------------

// Asymptotic Kolmogorov distribution tail, with Stephens' small-sample
// correction on the statistic.
inline double ks_p_value(double d, double n_eff) {
    const double sqrt_n = std::sqrt(n_eff);
    const double lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) *
                            std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

// One-sample KS against a CDF.
inline double ks_test(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return ks_p_value(d, n);
}

// Two-sample KS.
inline double ks_test_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                                 static_cast<double>(j) / b.size()));
    }
    const double n_eff = static_cast<double>(a.size()) * b.size() /
                         static_cast<double>(a.size() + b.size());
    return ks_p_value(d, n_eff);
}

// Chi-squared upper-tail p-value.
inline double chi2_p_value(double statistic, int dof) {
    return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

// Compositions of n into k nonnegative parts, visited in lexicographic order.
inline void for_each_composition(long long n, int k,
                                 const std::function<void(const std::vector<long long>&)>& fn) {
    std::vector<long long> parts(k, 0);
    std::function<void(int, long long)> rec = [&](int idx, long long left) {
        if (idx == k - 1) {
            parts[idx] = left;
            fn(parts);
            return;
        }
        for (long long v = 0; v <= left; ++v) {
            parts[idx] = v;
            rec(idx + 1, left - v);
        }
    };
    rec(0, n);
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double stddev(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace oracles
