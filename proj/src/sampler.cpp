#include "qtomo/sampler.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace qtomo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kMaxShrinkRejections = 1000;

struct SliceDiag : SliceDiagnostics {
    double accepted_log = kNegInf;
};

double slice_sample_impl(const std::function<double(double)>& log_target, double x0,
                         const ParamSpec& spec, Rng& rng, SliceDiag& diag) {
    const double f0 = log_target(x0);
    diag.evaluations = 1;
    if (!std::isfinite(f0))
        throw std::invalid_argument("slice_sample_1d: log_target not finite at x0");
    const double log_y = f0 + std::log(rng.uniform_pos());

    const double w = spec.initial_width();
    auto eval = [&](double x) {
        ++diag.evaluations;
        return log_target(spec.cyclic ? spec.wrap(x) : x);
    };

    double left = x0 - w * rng.uniform();
    double right = left + w;

    if (spec.cyclic) {
        const double period = spec.range();
        while (right - left < period && eval(left) > log_y) left -= w;
        while (right - left < period && eval(right) > log_y) right += w;
        if (right - left >= period) {
            // The slice covers the whole circle; sample one exact period so
            // the wrapped draw stays uniform.
            left = x0 - period / 2.0;
            right = x0 + period / 2.0;
        }
    } else {
        left = std::max(left, spec.lower);
        right = std::min(right, spec.upper);
        while (left > spec.lower && eval(left) > log_y) left = std::max(spec.lower, left - w);
        while (right < spec.upper && eval(right) > log_y) right = std::min(spec.upper, right + w);
    }
    diag.interval_width = right - left;

    for (int rejections = 0; rejections <= kMaxShrinkRejections; ++rejections) {
        const double h = rng.uniform(left, right);
        const double fh = eval(h);
        if (fh >= log_y) {
            diag.accepted_log = fh;
            return spec.cyclic ? spec.wrap(h) : h;
        }
        if (h > x0)
            right = h;
        else if (h < x0)
            left = h;
        else
            break;
    }
    throw std::runtime_error("slice_sample_1d: shrinkage failed to accept after " +
                             std::to_string(kMaxShrinkRejections) + " rejections");
}

double wrap_angle_diff(double a, double b) {
    // Smallest absolute difference between two angles in radians.
    double d = std::fmod(a - b, 2.0 * std::numbers::pi);
    if (d < -std::numbers::pi) d += 2.0 * std::numbers::pi;
    if (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
    return std::abs(d);
}

ChainSummary summarize(const Eigen::MatrixXd& round, std::span<const ParamSpec> specs) {
    const int k = static_cast<int>(specs.size());
    const int rows = static_cast<int>(round.rows());
    ChainSummary s;
    s.mean.resize(k);
    s.stddev.resize(k);
    s.mean_cos.assign(k, 0.0);
    s.mean_sin.assign(k, 0.0);
    for (int i = 0; i < k; ++i) {
        if (specs[i].cyclic) {
            const double scale = 2.0 * std::numbers::pi / specs[i].range();
            double c = 0.0, sn = 0.0;
            for (int r = 0; r < rows; ++r) {
                const double a = (round(r, i) - specs[i].lower) * scale;
                c += std::cos(a);
                sn += std::sin(a);
            }
            c /= rows;
            sn /= rows;
            s.mean_cos[i] = c;
            s.mean_sin[i] = sn;
            const double rbar = std::hypot(c, sn);
            double ang = std::atan2(sn, c);
            if (ang < 0.0) ang += 2.0 * std::numbers::pi;
            s.mean[i] = specs[i].lower + ang / scale;
            s.stddev[i] = rbar > 1e-300
                              ? std::sqrt(std::max(0.0, -2.0 * std::log(rbar))) / scale
                              : std::numeric_limits<double>::infinity();
        } else {
            const double mean = round.col(i).mean();
            const double var =
                rows > 1 ? (round.col(i).array() - mean).square().sum() / (rows - 1) : 0.0;
            s.mean[i] = mean;
            s.stddev[i] = std::sqrt(var);
        }
    }
    return s;
}

bool means_converged(const std::vector<ChainSummary>& stats,
                     std::span<const ParamSpec> specs, double m) {
    const int C = static_cast<int>(stats.size());
    const int k = static_cast<int>(specs.size());
    for (int i = 0; i < C; ++i)
        for (int j = 0; j < C; ++j) {
            if (i == j) continue;
            for (int p = 0; p < k; ++p) {
                if (specs[p].cyclic) {
                    // Compare the embedded mean vectors; a flat marginal has
                    // a short resultant and large embedded dispersion, so it
                    // cannot hold up convergence on a direction it does not
                    // actually have.
                    const double sep = std::hypot(
                        stats[i].mean_cos[p] - stats[j].mean_cos[p],
                        stats[i].mean_sin[p] - stats[j].mean_sin[p]);
                    const double rbar_j =
                        std::hypot(stats[j].mean_cos[p], stats[j].mean_sin[p]);
                    const double sigma_j = std::sqrt(2.0 * std::max(0.0, 1.0 - rbar_j));
                    if (!(sep <= m * sigma_j + 1e-12)) return false;
                } else {
                    const double sep = std::abs(stats[i].mean[p] - stats[j].mean[p]);
                    if (!(sep <= m * stats[j].stddev[p] + 1e-12)) return false;
                }
            }
        }
    return true;
}

}  // namespace

double ParamSpec::wrap(double x) const {
    if (!cyclic) return x;
    const double period = range();
    double y = std::fmod(x - lower, period);
    if (y < 0.0) y += period;
    return lower + y;
}

double slice_sample_1d(const std::function<double(double)>& log_target, double x0,
                       const ParamSpec& spec, Rng& rng, SliceDiagnostics* diag) {
    SliceDiag d;
    const double x1 = slice_sample_impl(log_target, x0, spec, rng, d);
    if (diag) *diag = d;
    return x1;
}

void gibbs_sweep(const LogDensity& log_posterior, ChainState& state,
                 std::span<const ParamSpec> specs, Rng& rng, const BoundsFn& bounds,
                 const std::vector<double>* widths, std::vector<double>* observed_widths) {
    const int k = static_cast<int>(specs.size());
    if (static_cast<int>(state.x.size()) != k)
        throw std::invalid_argument("gibbs_sweep: state/spec size mismatch");
    double last_accepted = state.log_value;
    for (int i = 0; i < k; ++i) {
        ParamSpec spec = specs[i];
        if (widths && (*widths)[i] > 0.0) spec.width = (*widths)[i];
        if (bounds) {
            const auto [lo, hi] = bounds(i, state.x);
            spec.lower = lo;
            spec.upper = hi;
        }
        auto conditional = [&](double v) {
            const double save = state.x[i];
            state.x[i] = v;
            const double val = log_posterior(state.x);
            state.x[i] = save;
            return val;
        };
        SliceDiag d;
        state.x[i] = slice_sample_impl(conditional, state.x[i], spec, rng, d);
        last_accepted = d.accepted_log;
        if (observed_widths) (*observed_widths)[i] += d.interval_width;
    }
    state.log_value = last_accepted;
}

int parallel_threads(int jobs) {
    int limit = static_cast<int>(std::thread::hardware_concurrency());
    if (limit <= 0) limit = 2;
    if (const char* env = std::getenv("QTOMO_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) limit = std::min(limit, cap);
    }
    return std::max(1, std::min(limit, jobs));
}

void parallel_for(int jobs, const std::function<void(int)>& fn) {
    const int threads = parallel_threads(jobs);
    if (threads <= 1) {
        for (int i = 0; i < jobs; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= jobs) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

PosteriorSamples run_chains(const LogDensity& log_posterior, std::vector<ParamSpec> specs,
                            const BurnInConfig& config, std::uint64_t seed,
                            const BoundsFn& bounds) {
    const int k = static_cast<int>(specs.size());
    const int C = std::max(2, config.chains);

    struct Chain {
        ChainState state;
        Rng rng{0};
        std::vector<double> widths;
        Eigen::MatrixXd round;
    };
    std::vector<Chain> chains(C);

    for (int c = 0; c < C; ++c) {
        Chain& chain = chains[c];
        chain.rng = Rng::derive(seed, {kChainStream, static_cast<std::uint64_t>(c)});
        chain.state.chain_id = c;
        chain.widths.assign(k, 0.0);
        bool found = false;
        for (int attempt = 0; attempt < 100 && !found; ++attempt) {
            chain.state.x.assign(k, 0.0);
            for (int i = 0; i < k; ++i) {
                double lo = specs[i].lower, hi = specs[i].upper;
                if (bounds) std::tie(lo, hi) = bounds(i, chain.state.x);
                chain.state.x[i] = chain.rng.uniform(lo, hi);
            }
            chain.state.log_value = log_posterior(chain.state.x);
            found = std::isfinite(chain.state.log_value);
        }
        if (!found)
            throw std::runtime_error("run_chains: no finite starting point after 100 tries");
    }

    PosteriorSamples out;
    out.specs = specs;
    out.diag.chains = C;

    int k_round = std::max(1, config.k0);
    std::vector<ChainSummary> stats(C);
    bool converged = false;
    int rounds = 0;
    while (true) {
        ++rounds;
        out.diag.round_sizes.push_back(k_round);
        parallel_for(C, [&](int c) {
            Chain& chain = chains[c];
            chain.round.resize(k_round, k);
            std::vector<double> observed(k, 0.0);
            for (int t = 0; t < k_round; ++t) {
                gibbs_sweep(log_posterior, chain.state, specs, chain.rng, bounds,
                            &chain.widths, &observed);
                chain.round.row(t) =
                    Eigen::Map<const Eigen::VectorXd>(chain.state.x.data(), k);
            }
            // Adapt step widths to the observed mean slice width.
            for (int i = 0; i < k; ++i) {
                const double wbar = observed[i] / k_round;
                const double range = specs[i].range();
                chain.widths[i] = std::clamp(wbar, 1e-6 * range, range);
            }
        });
        for (int c = 0; c < C; ++c) stats[c] = summarize(chains[c].round, specs);
        converged = means_converged(stats, specs, config.m);
        if (converged || rounds > config.max_doublings) break;
        k_round *= 2;  // all but each chain's last point are forgotten
    }
    out.diag.rounds = rounds;
    out.diag.converged = converged;
    out.diag.chain_stats = stats;

    // Final request: repeat the last round size (or enough to meet the pooled
    // target), widths frozen.
    const int k_final = std::max(k_round, (config.pooled_target + C - 1) / C);
    out.diag.k_final = k_final;
    parallel_for(C, [&](int c) {
        Chain& chain = chains[c];
        chain.round.resize(k_final, k);
        for (int t = 0; t < k_final; ++t) {
            gibbs_sweep(log_posterior, chain.state, specs, chain.rng, bounds,
                        &chain.widths, nullptr);
            chain.round.row(t) = Eigen::Map<const Eigen::VectorXd>(chain.state.x.data(), k);
        }
    });

    out.draws.resize(static_cast<Eigen::Index>(C) * k_final, k);
    out.chain_of.resize(static_cast<std::size_t>(C) * k_final);
    for (int c = 0; c < C; ++c) {
        out.draws.middleRows(static_cast<Eigen::Index>(c) * k_final, k_final) =
            chains[c].round;
        std::fill_n(out.chain_of.begin() + static_cast<std::ptrdiff_t>(c) * k_final,
                    k_final, c);
    }
    return out;
}

ParameterCovariance parameter_covariance(const PosteriorSamples& samples) {
    const int R = samples.size();
    const int k = samples.dim();
    if (R < 2) throw std::invalid_argument("parameter_covariance: need at least 2 samples");

    ParameterCovariance cov;
    for (int i = 0; i < k; ++i) {
        if (samples.specs[i].cyclic) {
            const auto& spec = samples.specs[i];
            const double scale = 2.0 * std::numbers::pi / spec.range();
            CircularSummary cs;
            cs.index = i;
            double c = 0.0, s = 0.0;
            for (int r = 0; r < R; ++r) {
                const double a = (samples.draws(r, i) - spec.lower) * scale;
                c += std::cos(a);
                s += std::sin(a);
            }
            cs.mean_cos = c / R;
            cs.mean_sin = s / R;
            double ang = std::atan2(cs.mean_sin, cs.mean_cos);
            if (ang < 0.0) ang += 2.0 * std::numbers::pi;
            cs.mean_angle = spec.lower + ang / scale;
            cs.circular_variance = 1.0 - std::hypot(cs.mean_cos, cs.mean_sin);
            cov.cyclic.push_back(cs);
        } else {
            cov.linear_indices.push_back(i);
        }
    }

    const int kl = static_cast<int>(cov.linear_indices.size());
    cov.matrix.resize(kl, kl);
    Eigen::MatrixXd centered(R, kl);
    for (int j = 0; j < kl; ++j) {
        const auto col = samples.draws.col(cov.linear_indices[j]);
        centered.col(j) = col.array() - col.mean();
    }
    cov.matrix = centered.transpose() * centered / (R - 1);
    return cov;
}

MeanStd column_mean_std(const PosteriorSamples& samples, int column) {
    const int R = samples.size();
    const double mean = samples.draws.col(column).mean();
    const double var =
        R > 1 ? (samples.draws.col(column).array() - mean).square().sum() / (R - 1) : 0.0;
    return {mean, std::sqrt(var)};
}

DensityMatrix posterior_mean_density(const PosteriorSamples& samples, int n,
                                     int tau_offset) {
    const int R = samples.size();
    const int k = HypersphericalParams::param_count(n);
    if (R < 1) throw std::invalid_argument("posterior_mean_density: empty sample set");
    if (tau_offset + k > samples.dim())
        throw std::invalid_argument("posterior_mean_density: tau columns out of range");
    Matrix acc = Matrix::Zero(n, n);
    std::vector<double> x(k);
    for (int r = 0; r < R; ++r) {
        for (int i = 0; i < k; ++i) x[i] = samples.draws(r, tau_offset + i);
        acc += density_from_params(HypersphericalParams::from_flat(n, x)).matrix();
    }
    acc /= static_cast<double>(R);
    return DensityMatrix::from_matrix(std::move(acc));
}

double trace_distance_deviation(const PosteriorSamples& samples,
                                const DensityMatrix& rho_bar, int tau_offset) {
    const int R = samples.size();
    const int n = rho_bar.dim();
    const int k = HypersphericalParams::param_count(n);
    if (R < 1)
        throw std::invalid_argument("trace_distance_deviation: empty sample set");
    if (tau_offset + k > samples.dim())
        throw std::invalid_argument("trace_distance_deviation: tau columns out of range");
    double acc = 0.0;
    std::vector<double> x(k);
    for (int r = 0; r < R; ++r) {
        for (int i = 0; i < k; ++i) x[i] = samples.draws(r, tau_offset + i);
        acc += trace_distance(rho_bar,
                              density_from_params(HypersphericalParams::from_flat(n, x)));
    }
    return acc / static_cast<double>(R);
}

}  // namespace qtomo
