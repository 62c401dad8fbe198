#pragma once

#include <span>
#include <vector>

#include "qtomo/likelihood.hpp"
#include "qtomo/sampler.hpp"

namespace qtomo {

struct AscentConfig {
    double w0 = 0.1;       // initial step size, in box-normalized coordinates
    double h = 1e-6;       // finite-difference step, raw coordinates
    double w_min = 1e-10;  // stop when the step size falls below this
    long long max_iterations = 100000;
    int multistarts = 8;
};

// Central-difference gradient with probes clamped into the box (one-sided at
// a boundary); cyclic coordinates probe across the seam unclamped.
std::vector<double> finite_diff_gradient(const LogDensity& log_target,
                                         std::span<const double> x,
                                         std::span<const ParamSpec> box,
                                         double h = 1e-6);

// Step-doubling/halving ascent along the normalized gradient: accepted steps
// double the step and refresh the direction, rejected steps halve it and
// keep the direction. Steps project onto the box (cyclic coordinates wrap).
// The value sequence is monotone; returns the best point seen.
struct AscentResult {
    std::vector<double> x;
    double value = 0.0;
    long long iterations = 0;
};
AscentResult gradient_ascent(const LogDensity& log_target, std::vector<double> x0,
                             std::span<const ParamSpec> box, const AscentConfig& config,
                             Rng& rng);

// Joint maximum of the experiment-specific likelihood over the state angles
// and the (unknown) pathway efficiencies, by multistart ascent. `ridge` is
// set when distinct parameter points tie in value, i.e. the data does not
// identify a unique maximum.
struct ExperimentMle {
    HypersphericalParams tau;
    EfficiencySet eff;
    double log_value = 0.0;
    bool ridge = false;
};
ExperimentMle experiment_specific_mle(const TomographyDataset& ds,
                                      const AscentConfig& config = {},
                                      std::uint64_t seed = 0);

// Baseline estimator: corrects each basis' coincidences with the known
// efficiencies, then maximizes the product of multinomials over the state.
HypersphericalParams traditional_mle(const TomographyDataset& ds,
                                     const PathwayEfficiencies& known_eff,
                                     const AscentConfig& config = {},
                                     std::uint64_t seed = 0);

}  // namespace qtomo
