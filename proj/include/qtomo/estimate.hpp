#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qtomo/dataset.hpp"
#include "qtomo/likelihood.hpp"
#include "qtomo/param_layout.hpp"
#include "qtomo/sampler.hpp"

namespace qtomo {

// Prior over the state angles: the Haar-invariant measure, or a flat density
// in the angle box (a deliberately different measure for prior-sensitivity
// checks).
enum class StatePrior { Haar, FlatAngles };

struct BmeOptions {
    BurnInConfig burnin;
    std::uint64_t seed = 0;
    StatePrior prior = StatePrior::Haar;
};

struct EfficiencyPosterior {
    std::string label;  // basis label, or "shared"
    MeanStd a0, a1, b0, b1;
};

// Bayesian mean estimate of a two-qubit state from a tomography dataset,
// with posterior summaries for everything the experiment does not know.
struct StateBme {
    DensityMatrix rho_bar;
    PosteriorSamples samples;  // columns: state angles, then efficiency blocks
    ParamLayout layout;
    double trace_distance_dev = 0.0;
    std::vector<std::pair<std::string, MeanStd>> mean_photon;  // per basis
    std::vector<EfficiencyPosterior> efficiencies;
    bool converged = false;
};

StateBme bme_state_estimate(const TomographyDataset& ds, const BmeOptions& opts);

// Flat-prior estimation of one basis' raw parameters (joint probabilities on
// the simplex plus the four efficiencies); no state parametrization.
struct RawSingleBasisEstimate {
    MeanStd p00, p01, p10, p11, a0, a1, b0, b1;
    MeanStd pair_number;
    PosteriorSamples samples;  // columns: p00, p01, p10, a0, a1, b0, b1
    bool converged = false;
};

RawSingleBasisEstimate single_basis_raw_estimate(const SingleBasisCounts& counts,
                                                 const BurnInConfig& burnin,
                                                 std::uint64_t seed);

}  // namespace qtomo
