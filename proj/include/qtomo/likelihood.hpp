#pragma once

#include <span>
#include <utility>
#include <vector>

#include "qtomo/dataset.hpp"
#include "qtomo/density.hpp"
#include "qtomo/sampler.hpp"

namespace qtomo {

// Joint two-photon outcome probabilities in one basis pair; nonnegative and
// summing to 1.
struct JointProbabilities {
    double p00 = 0.25, p01 = 0.25, p10 = 0.25, p11 = 0.25;

    double sum() const { return p00 + p01 + p10 + p11; }
    void validate() const;
};

// p_ij = Tr[rho (P_i^A x P_j^B)] with projectors for Z the computational
// basis, for X the Hadamard-rotated basis and for Y the basis reached by a
// quarter-wave then half-wave plate in front of a Z measurement.
JointProbabilities joint_outcome_probabilities(const DensityMatrix& rho, Basis alice,
                                               Basis bob);

// Probability that both photons of a pair go undetected.
double pair_loss_probability(const JointProbabilities& p,
                             const PathwayEfficiencies& eff);

// Full log P(D, N | alpha) for a known pair number N, including the
// multinomial multiplicity gamma(N). -infinity when any event with positive
// multiplicity has zero probability. N < s - n is a domain error.
double log_likelihood_known_N(const SingleBasisCounts& counts, long long N,
                              const JointProbabilities& p,
                              const PathwayEfficiencies& eff);

// Log P(D | alpha) with N marginalized out analytically (constants omitted):
//   sum A_i log a_i + sum B_j log b_j + sum c_ij log p_ij
//   + the four singles-loss bracket terms + (n - s - 1) log(1 - g).
double log_likelihood_marginal_N(const SingleBasisCounts& counts,
                                 const JointProbabilities& p,
                                 const PathwayEfficiencies& eff);

// Pathway efficiencies for a whole dataset: one set shared across bases or
// one per basis record.
struct EfficiencySet {
    EfficiencyMode mode = EfficiencyMode::Shared;
    std::vector<PathwayEfficiencies> values;  // size 1 or records.size()

    const PathwayEfficiencies& for_record(std::size_t i) const {
        return mode == EfficiencyMode::Shared ? values.front() : values.at(i);
    }
};

// Sum of marginal log likelihoods over all basis records plus the log of the
// Haar measure density (the state prior; efficiencies are uniform).
double multi_basis_log_posterior(const TomographyDataset& ds,
                                 const HypersphericalParams& tau,
                                 const EfficiencySet& eff);

// Likelihood-only variant (no measure term), for maximum likelihood searches.
double multi_basis_log_likelihood(const TomographyDataset& ds,
                                  const HypersphericalParams& tau,
                                  const EfficiencySet& eff);

// Appendix-style renormalization of coincidences to the least efficient
// pathways: k_ij = (a_m b_m / a_i b_j) c_ij with a_m = min(a0, a1) etc.
struct CorrectedCounts {
    double k00 = 0, k01 = 0, k10 = 0, k11 = 0;
};
CorrectedCounts traditional_corrected_counts(const SingleBasisCounts& counts,
                                             const PathwayEfficiencies& eff);

// Multinomial log likelihood over real-valued corrected counts.
double traditional_log_likelihood(const CorrectedCounts& k,
                                  const JointProbabilities& p);

// Posterior mean and standard deviation of the pair number,
// N = (s - n + g) / (1 - g), over posterior samples of (p, eff).
MeanStd mean_photon_number(
    const SingleBasisCounts& counts,
    std::span<const std::pair<JointProbabilities, PathwayEfficiencies>> samples);

}  // namespace qtomo
