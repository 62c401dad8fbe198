#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "qtomo/estimate.hpp"
#include "qtomo/mle.hpp"
#include "qtomo/single_qubit.hpp"

namespace qtomo {

using OrderedJson = nlohmann::ordered_json;

// (|01> + |10>) / sqrt(2)
CVector psi_plus();

OrderedJson density_json(const DensityMatrix& rho);

// For 2x2 states the Bloch vector; for 4x4 the 15 Pauli-product expectations.
OrderedJson expectation_summary_json(const DensityMatrix& rho);

struct FidelitySummary {
    double value = 0.0;          // sqrt(<psi| rho_bar |psi>)
    double posterior_std = 0.0;  // spread of per-sample fidelities
};
FidelitySummary fidelity_summary(const StateBme& est, const CVector& psi);

struct TargetState {
    std::string name;
    CVector psi;
};

OrderedJson state_bme_report(const StateBme& est, std::uint64_t seed,
                             const std::optional<TargetState>& target);
OrderedJson raw_single_basis_report(const RawSingleBasisEstimate& est,
                                    std::uint64_t seed);
OrderedJson experiment_mle_report(const ExperimentMle& est,
                                  const std::vector<std::string>& basis_labels,
                                  std::uint64_t seed,
                                  const std::optional<TargetState>& target);
OrderedJson traditional_mle_report(const HypersphericalParams& tau,
                                   const PathwayEfficiencies& eff, std::uint64_t seed,
                                   const std::optional<TargetState>& target);

OrderedJson single_qubit_lie_report(const LieEstimate& est);
OrderedJson single_qubit_mle_report(const SingleQubitMle& est);
OrderedJson single_qubit_bme_report(const SingleQubitBme& est);
OrderedJson single_qubit_laplace_report(const LaplaceReport& report);

// Structured error payload emitted by the CLI on failures.
OrderedJson error_json(const std::string& kind, const std::string& message);

}  // namespace qtomo
