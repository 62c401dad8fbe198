#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qtomo/density.hpp"
#include "qtomo/rng.hpp"

namespace qtomo {

// One sampled coordinate. Cyclic parameters are periodic with period
// (upper - lower); they get no hard bounds during slice sampling and results
// are wrapped back into range.
struct ParamSpec {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
    bool cyclic = false;
    double width = 0.0;  // initial slice step; 0 means (upper - lower) / 10

    double range() const { return upper - lower; }
    double initial_width() const { return width > 0.0 ? width : range() / 10.0; }
    double wrap(double x) const;
};

using LogDensity = std::function<double(std::span<const double>)>;

// Optional per-coordinate dynamic bounds for conditionals whose support
// depends on the other coordinates (e.g. probability simplices). Returns
// {lower, upper} for coordinate i given the current full vector.
using BoundsFn =
    std::function<std::pair<double, double>(int, std::span<const double>)>;

struct SliceDiagnostics {
    double interval_width = 0.0;  // width of the slice after step-out
    int evaluations = 0;
};

// One draw from an unnormalized 1-d density via Neal's step-out/shrinkage
// slice sampler. log_target(x0) must be finite. The vertical level is drawn
// in log space: log y = log f(x0) + log Uniform(0, 1].
double slice_sample_1d(const std::function<double(double)>& log_target, double x0,
                       const ParamSpec& spec, Rng& rng,
                       SliceDiagnostics* diag = nullptr);

struct ChainState {
    std::vector<double> x;
    double log_value = 0.0;
    std::uint64_t chain_id = 0;
};

// One sequential sweep: each coordinate is slice sampled from its full
// conditional, keeping every new value for the following coordinates.
// `widths`, when given, overrides each spec's step width; `observed_widths`,
// when given, accumulates the post-step-out slice widths for adaptation.
void gibbs_sweep(const LogDensity& log_posterior, ChainState& state,
                 std::span<const ParamSpec> specs, Rng& rng,
                 const BoundsFn& bounds = {},
                 const std::vector<double>* widths = nullptr,
                 std::vector<double>* observed_widths = nullptr);

struct BurnInConfig {
    int chains = 4;
    int k0 = 200;             // samples per chain in the first round
    double m = 0.5;           // mean-separation convergence multiplier
    int max_doublings = 8;
    int pooled_target = 20000;  // minimum pooled size of the final round
};

struct ChainSummary {
    std::vector<double> mean;    // circular mean for cyclic coordinates
    std::vector<double> stddev;  // circular stddev for cyclic coordinates
    // Resultant components for cyclic coordinates (zero for linear ones);
    // convergence compares these embedded vectors, which stay meaningful
    // even when a cyclic marginal is flat and has no usable mean angle.
    std::vector<double> mean_cos;
    std::vector<double> mean_sin;
};

struct PosteriorSamples {
    Eigen::MatrixXd draws;        // R x k, final-round samples from all chains
    std::vector<int> chain_of;    // chain id per row
    std::vector<ParamSpec> specs;

    struct Diagnostics {
        bool converged = false;
        int chains = 0;
        int rounds = 0;
        std::vector<int> round_sizes;  // k_i per burn-in round
        int k_final = 0;
        std::vector<ChainSummary> chain_stats;  // at the last convergence check
    } diag;

    int size() const { return static_cast<int>(draws.rows()); }
    int dim() const { return static_cast<int>(draws.cols()); }
};

// Multi-chain slice sampling with doubling burn-in. Chains start at
// independent uniform points; rounds of k_i sweeps repeat, doubling k and
// discarding all but the last point, until every pair of chain means is
// separated by less than m * sigma in every coordinate. One more round per
// chain (of at least pooled_target / chains sweeps) is pooled and returned.
// Deterministic given the seed; chains may execute in parallel.
// Non-convergence is reported in diag, never thrown.
PosteriorSamples run_chains(const LogDensity& log_posterior,
                            std::vector<ParamSpec> specs, const BurnInConfig& config,
                            std::uint64_t seed, const BoundsFn& bounds = {});

struct CircularSummary {
    int index = 0;          // coordinate index in the sample matrix
    double mean_cos = 0.0;  // E[cos], E[sin] of the angle mapped to [0, 2*pi)
    double mean_sin = 0.0;
    double mean_angle = 0.0;      // atan2 of the above, in [lower, upper)
    double circular_variance = 0.0;  // 1 - |resultant|
};

struct ParameterCovariance {
    std::vector<int> linear_indices;   // coordinates covered by the matrix
    Eigen::MatrixXd matrix;            // covariance over linear coordinates
    std::vector<CircularSummary> cyclic;
};

// Sample covariance. Cyclic coordinates are excluded from the linear matrix
// and summarized through their (cos, sin) embedding, since linear moments
// are meaningless for distributions centered on a period boundary.
ParameterCovariance parameter_covariance(const PosteriorSamples& samples);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

MeanStd column_mean_std(const PosteriorSamples& samples, int column);

// Entrywise average of rho(tau^(r)) over all samples; tau occupies columns
// [tau_offset, tau_offset + n^2 - 1) of the sample matrix.
DensityMatrix posterior_mean_density(const PosteriorSamples& samples, int n,
                                     int tau_offset = 0);

// Mean trace distance between rho_bar and each sampled state; a scalar
// certainty summary that tends to zero as the posterior concentrates.
double trace_distance_deviation(const PosteriorSamples& samples,
                                const DensityMatrix& rho_bar, int tau_offset = 0);

// Number of threads to use for parallel chains/work items: the minimum of
// the hardware concurrency, the QTOMO_THREADS environment variable (if set)
// and `jobs`.
int parallel_threads(int jobs);

// Runs fn(i) for i in [0, jobs) on up to parallel_threads(jobs) threads.
void parallel_for(int jobs, const std::function<void(int)>& fn);

}  // namespace qtomo
