#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qtomo/dataset.hpp"
#include "qtomo/density.hpp"
#include "qtomo/estimate.hpp"
#include "qtomo/likelihood.hpp"
#include "qtomo/mle.hpp"
#include "qtomo/rng.hpp"

namespace qtomo {

// One simulated basis: each of N pairs is destined to joint outcome ij with
// probability p_ij, then each photon independently survives its pathway.
// Singles count every survivor, coincidences only joint survivals.
SingleBasisCounts simulate_single_basis(const JointProbabilities& p,
                                        const PathwayEfficiencies& eff, long long N,
                                        Rng& rng);

// N pairs per basis, probabilities taken from the state.
TomographyDataset simulate_tomography(const DensityMatrix& rho,
                                      const PathwayEfficiencies& eff, long long N,
                                      std::span<const BasisPair> bases, Rng& rng);

// Log density of the deliberately non-invariant comparison prior: flat in
// the angle box, i.e. the Haar log-prior minus log sqrt(det g).
double alt_prior_target(const HypersphericalParams& tau);

struct StudyConfig {
    std::vector<long long> grid{10, 100, 1000, 10000, 100000};
    int repetitions = 100;
    bool flat_prior_bme = false;  // add the flat-angle-prior BME to the roster
    std::uint64_t seed = 0;
    BurnInConfig bme_burnin{4, 100, 0.5, 6, 2000};
    AscentConfig ascent{};
};

struct StudyCell {
    long long pairs = 0;
    int repetition = 0;
    // Trace distance to the true state per estimator; NaN marks a failure.
    double d_bme = 0.0;
    double d_mle = 0.0;
    double d_traditional = 0.0;
    double d_bme_flat = 0.0;
};

struct StudySummary {
    std::string estimator;
    std::vector<double> mean_distance;  // per grid entry, failures excluded
    std::vector<int> failures;
    std::vector<int> wins;        // strictly closer than the traditional MLE
    std::vector<int> comparisons;  // cells where both distances were defined
};

struct StudyReport {
    std::vector<long long> grid;
    int repetitions = 0;
    bool flat_prior_bme = false;
    std::vector<StudyCell> cells;  // grid-major, repetition-minor
    std::vector<StudySummary> summaries;
};

// The estimator comparison: per (N, repetition) draw a Haar-random state and
// uniform efficiencies, simulate all nine bases, run the traditional MLE
// (true efficiencies), the experiment-specific MLE and BME (efficiencies
// unknown), and tally distances and wins. Pure function of the config.
StudyReport run_performance_study(const StudyConfig& config);

std::string study_report_json(const StudyReport& report);
std::string study_report_csv(const StudyReport& report);

}  // namespace qtomo
