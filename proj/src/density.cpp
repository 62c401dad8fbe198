#include "qtomo/density.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qtomo/sampler.hpp"

namespace qtomo {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Index of theta/phi entry (i, j), 1-based with 2 <= i <= n, j < i.
int tri_index(int i, int j) { return (i - 2) * (i - 1) / 2 + (j - 1); }

void build_factor(const HypersphericalParams& tau, Matrix& L) {
    const int n = tau.n;
    L.setZero(n, n);

    // U_i: cos(u_i) times the prefix product of sines (all sines for i = n).
    std::vector<double> U(n);
    double sin_prefix = 1.0;
    for (int k = 0; k < n - 1; ++k) {
        U[k] = std::cos(tau.u[k]) * sin_prefix;
        sin_prefix *= std::sin(tau.u[k]);
    }
    U[n - 1] = sin_prefix;

    L(0, 0) = U[0];
    for (int i = 2; i <= n; ++i) {
        double row_sin = 1.0;  // prod_{m<j} sin(theta_im)
        for (int j = 1; j < i; ++j) {
            const int t = tri_index(i, j);
            const double th = tau.theta[t];
            const double ph = tau.phi[t];
            L(i - 1, j - 1) = U[i - 1] * row_sin * std::cos(th) *
                              Complex(std::cos(ph), std::sin(ph));
            row_sin *= std::sin(th);
        }
        L(i - 1, i - 1) = U[i - 1] * row_sin;
    }
}

void factor_to_density(const Matrix& L, Matrix& rho) {
    const int n = static_cast<int>(L.rows());
    rho.resize(n, n);
    // rho = L L^dagger with L lower triangular.
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b <= a; ++b) {
            Complex acc = 0.0;
            for (int k = 0; k <= b; ++k) acc += L(a, k) * std::conj(L(b, k));
            rho(a, b) = acc;
            if (a != b) rho(b, a) = std::conj(acc);
        }
    }
}

void build_density(const HypersphericalParams& tau, Matrix& rho) {
    Matrix L;
    build_factor(tau, L);
    factor_to_density(L, rho);
}

// Cached sines/cosines of all angles in flat layout order, so a
// finite-difference probe only refreshes one entry.
struct TrigCache {
    int n = 0;
    std::vector<double> sin_v, cos_v;  // one pair per flat parameter

    void load(std::span<const double> x, int n_in) {
        n = n_in;
        const int k = static_cast<int>(x.size());
        sin_v.resize(k);
        cos_v.resize(k);
        for (int i = 0; i < k; ++i) {
            sin_v[i] = std::sin(x[i]);
            cos_v[i] = std::cos(x[i]);
        }
    }

    void set(int i, double value) {
        sin_v[i] = std::sin(value);
        cos_v[i] = std::cos(value);
    }

    void build_factor_into(Matrix& L) const {
        const int nu = n - 1;
        const int nt = n * (n - 1) / 2;
        L.setZero(n, n);
        double sin_prefix = 1.0;
        std::vector<double> U(n);
        for (int k = 0; k < nu; ++k) {
            U[k] = cos_v[k] * sin_prefix;
            sin_prefix *= sin_v[k];
        }
        U[n - 1] = sin_prefix;

        L(0, 0) = U[0];
        for (int i = 2; i <= n; ++i) {
            double row_sin = 1.0;
            for (int j = 1; j < i; ++j) {
                const int t = nu + tri_index(i, j);
                const int p = nu + nt + tri_index(i, j);
                L(i - 1, j - 1) =
                    U[i - 1] * row_sin * cos_v[t] * Complex(cos_v[p], sin_v[p]);
                row_sin *= sin_v[t];
            }
            L(i - 1, i - 1) = U[i - 1] * row_sin;
        }
    }
};

}  // namespace

HypersphericalParams HypersphericalParams::zeros(int n) {
    if (n < 2) throw std::invalid_argument("HypersphericalParams: n must be >= 2");
    HypersphericalParams tau;
    tau.n = n;
    tau.u.assign(n - 1, 0.0);
    tau.theta.assign(tau.tri_count(), 0.0);
    tau.phi.assign(tau.tri_count(), 0.0);
    return tau;
}

std::vector<double> HypersphericalParams::flatten() const {
    std::vector<double> out;
    out.reserve(param_count(n));
    out.insert(out.end(), u.begin(), u.end());
    out.insert(out.end(), theta.begin(), theta.end());
    out.insert(out.end(), phi.begin(), phi.end());
    return out;
}

HypersphericalParams HypersphericalParams::from_flat(int n, std::span<const double> x) {
    if (static_cast<int>(x.size()) != param_count(n))
        throw std::invalid_argument("HypersphericalParams::from_flat: wrong size");
    HypersphericalParams tau;
    tau.n = n;
    const int t = n * (n - 1) / 2;
    tau.u.assign(x.begin(), x.begin() + (n - 1));
    tau.theta.assign(x.begin() + (n - 1), x.begin() + (n - 1) + t);
    tau.phi.assign(x.begin() + (n - 1) + t, x.end());
    return tau;
}

std::vector<std::string> HypersphericalParams::param_names(int n) {
    std::vector<std::string> names;
    for (int k = 1; k < n; ++k) names.push_back("u" + std::to_string(k));
    for (int i = 2; i <= n; ++i)
        for (int j = 1; j < i; ++j)
            names.push_back("theta" + std::to_string(i) + std::to_string(j));
    for (int i = 2; i <= n; ++i)
        for (int j = 1; j < i; ++j)
            names.push_back("phi" + std::to_string(i) + std::to_string(j));
    return names;
}

void HypersphericalParams::validate() const {
    if (n < 2) throw std::invalid_argument("HypersphericalParams: n must be >= 2");
    if (static_cast<int>(u.size()) != n - 1 ||
        static_cast<int>(theta.size()) != tri_count() ||
        static_cast<int>(phi.size()) != tri_count())
        throw std::invalid_argument("HypersphericalParams: parameter-vector shape mismatch");
    for (double v : u)
        if (!(v >= 0.0 && v <= kHalfPi))
            throw std::invalid_argument("HypersphericalParams: u out of [0, pi/2]");
    for (double v : theta)
        if (!(v >= 0.0 && v <= kHalfPi))
            throw std::invalid_argument("HypersphericalParams: theta out of [0, pi/2]");
    for (double v : phi)
        if (!(v >= 0.0 && v < kTwoPi))
            throw std::invalid_argument("HypersphericalParams: phi out of [0, 2*pi)");
}

DensityMatrix DensityMatrix::from_matrix(Matrix m) {
    DensityMatrix rho(std::move(m));
    rho.validate();
    return rho;
}

void DensityMatrix::validate() const {
    if (m_.rows() != m_.cols() || m_.rows() < 1)
        throw std::invalid_argument("DensityMatrix: not square");
    const double herm = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    if (!(herm <= kHermitianTol))
        throw std::invalid_argument("DensityMatrix: not Hermitian");
    const std::complex<double> tr = m_.trace();
    if (!(std::abs(tr - 1.0) <= kTraceTol))
        throw std::invalid_argument("DensityMatrix: trace != 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es((m_ + m_.adjoint()) / 2.0,
                                             Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < kEigenvalueFloor)
        throw std::invalid_argument("DensityMatrix: negative eigenvalue");
}

Matrix cholesky_factor(const HypersphericalParams& tau) {
    tau.validate();
    Matrix L;
    build_factor(tau, L);
    return L;
}

DensityMatrix density_from_params(const HypersphericalParams& tau) {
    tau.validate();
    Matrix rho;
    build_density(tau, rho);
    return DensityMatrix::unchecked(std::move(rho));
}

double metric_determinant_sqrt(const HypersphericalParams& tau) {
    tau.validate();
    const int n = tau.n;
    const int k = HypersphericalParams::param_count(n);
    const int nu = n - 1;
    const int nt = tau.tri_count();
    const double h = 1e-6;

    const std::vector<double> x = tau.flatten();

    struct Workspace {
        TrigCache trig;
        Matrix L, plus, minus;
        Eigen::MatrixXd G, g;
    };
    thread_local Workspace ws;
    ws.trig.load(x, n);
    ws.G.resize(k, 2 * n * n);

    // Rows of G are vectorized d rho / d tau_i (real then imaginary parts).
    for (int i = 0; i < k; ++i) {
        const bool cyclic = i >= nu + nt;
        double lo, hi;
        if (cyclic) {
            // phi probes may leave [0, 2*pi); rho is periodic in phi
            lo = x[i] - h;
            hi = x[i] + h;
        } else {
            lo = std::max(0.0, x[i] - h);
            hi = std::min(kHalfPi, x[i] + h);
        }
        ws.trig.set(i, hi);
        ws.trig.build_factor_into(ws.L);
        factor_to_density(ws.L, ws.plus);
        ws.trig.set(i, lo);
        ws.trig.build_factor_into(ws.L);
        factor_to_density(ws.L, ws.minus);
        ws.trig.set(i, x[i]);

        const double inv = 1.0 / (hi - lo);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                const Complex d = (ws.plus(a, b) - ws.minus(a, b)) * inv;
                ws.G(i, a * n + b) = d.real();
                ws.G(i, n * n + a * n + b) = d.imag();
            }
    }

    ws.g.noalias() = ws.G * ws.G.transpose();
    const double det = ws.g.determinant();
    return det > 0.0 ? std::sqrt(det) : 0.0;
}

// Memoized wrapper: posterior sweeps slice one coordinate at a time, so
// evaluations where the state angles did not change (efficiency conditionals)
// can reuse the previous measure value.
double metric_determinant_sqrt_cached(std::span<const double> tau_flat, int n) {
    thread_local std::vector<double> last_x;
    thread_local int last_n = 0;
    thread_local double last_value = 0.0;
    if (last_n == n && last_x.size() == tau_flat.size() &&
        std::equal(tau_flat.begin(), tau_flat.end(), last_x.begin()))
        return last_value;
    const double value =
        metric_determinant_sqrt(HypersphericalParams::from_flat(n, tau_flat));
    last_x.assign(tau_flat.begin(), tau_flat.end());
    last_n = n;
    last_value = value;
    return value;
}

BlochVector pauli_expectations(const DensityMatrix& rho) {
    if (rho.dim() != 2)
        throw std::invalid_argument("pauli_expectations: 2x2 input required");
    const Matrix& m = rho.matrix();
    BlochVector b;
    b.z = std::real(m(0, 0) - m(1, 1));
    b.x = 2.0 * std::real(m(1, 0));
    b.y = 2.0 * std::imag(m(1, 0));
    return b;
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim())
        throw std::invalid_argument("trace_distance: dimension mismatch");
    Matrix diff = rho.matrix() - sigma.matrix();
    diff = (diff + diff.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(diff, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double fidelity_with_pure(const DensityMatrix& rho, const CVector& psi) {
    if (psi.size() != rho.dim())
        throw std::invalid_argument("fidelity_with_pure: dimension mismatch");
    if (std::abs(psi.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("fidelity_with_pure: psi not normalized");
    const Complex q = psi.adjoint() * rho.matrix() * psi;
    return std::sqrt(std::max(0.0, q.real()));
}

namespace {

std::vector<ParamSpec> haar_param_specs(int n) {
    std::vector<ParamSpec> specs;
    const auto names = HypersphericalParams::param_names(n);
    const int nu = n - 1;
    const int nt = n * (n - 1) / 2;
    for (int i = 0; i < n * n - 1; ++i) {
        ParamSpec s;
        s.name = names[i];
        if (i < nu + nt) {
            s.lower = 0.0;
            s.upper = kHalfPi;
        } else {
            s.lower = 0.0;
            s.upper = kTwoPi;
            s.cyclic = true;
        }
        specs.push_back(s);
    }
    return specs;
}

constexpr int kHaarBurnInSweeps = 64;

}  // namespace

HypersphericalParams haar_uniform_sample(Rng& rng, int n) {
    auto all = haar_uniform_samples(rng, n, 1);
    return all.front();
}

std::vector<HypersphericalParams> haar_uniform_samples(Rng& rng, int n, int count) {
    const auto specs = haar_param_specs(n);
    auto log_target = [n](std::span<const double> x) {
        const double v = metric_determinant_sqrt(HypersphericalParams::from_flat(n, x));
        return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
    };

    ChainState state;
    for (int attempt = 0; attempt < 100; ++attempt) {
        state.x.clear();
        for (const auto& s : specs) state.x.push_back(rng.uniform(s.lower, s.upper));
        state.log_value = log_target(state.x);
        if (std::isfinite(state.log_value)) break;
    }
    if (!std::isfinite(state.log_value))
        throw std::runtime_error("haar_uniform_sample: no finite starting point");

    for (int i = 0; i < kHaarBurnInSweeps; ++i) gibbs_sweep(log_target, state, specs, rng);

    std::vector<HypersphericalParams> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        gibbs_sweep(log_target, state, specs, rng);
        out.push_back(HypersphericalParams::from_flat(n, state.x));
    }
    return out;
}

std::string density_to_json(const DensityMatrix& rho) {
    const int n = rho.dim();
    char buf[40];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    std::ostringstream os;
    os << "{\"n\": " << n << ", \"re\": [";
    for (int a = 0; a < n; ++a) {
        os << (a ? ", [" : "[");
        for (int b = 0; b < n; ++b) os << (b ? ", " : "") << num(rho.matrix()(a, b).real());
        os << "]";
    }
    os << "], \"im\": [";
    for (int a = 0; a < n; ++a) {
        os << (a ? ", [" : "[");
        for (int b = 0; b < n; ++b) os << (b ? ", " : "") << num(rho.matrix()(a, b).imag());
        os << "]";
    }
    os << "]}";
    return os.str();
}

DensityMatrix density_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    const int n = j.at("n").get<int>();
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (static_cast<int>(re.size()) != n || static_cast<int>(im.size()) != n)
        throw std::invalid_argument("density_from_json: row count mismatch");
    Matrix m(n, n);
    for (int a = 0; a < n; ++a) {
        if (static_cast<int>(re[a].size()) != n || static_cast<int>(im[a].size()) != n)
            throw std::invalid_argument("density_from_json: column count mismatch");
        for (int b = 0; b < n; ++b)
            m(a, b) = Complex(re[a][b].get<double>(), im[a][b].get<double>());
    }
    return DensityMatrix::from_matrix(std::move(m));
}

}  // namespace qtomo
