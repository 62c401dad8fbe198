#include "qtomo/report.hpp"

#include <array>
#include <cmath>

namespace qtomo {

namespace {

OrderedJson mean_std_json(const MeanStd& ms) {
    return OrderedJson{{"mean", ms.mean}, {"std", ms.std}};
}

OrderedJson matrix_json(const Eigen::MatrixXd& m) {
    OrderedJson rows = OrderedJson::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        OrderedJson row = OrderedJson::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

OrderedJson covariance_json(const ParameterCovariance& cov,
                            std::span<const ParamSpec> specs) {
    OrderedJson out;
    OrderedJson names = OrderedJson::array();
    for (int idx : cov.linear_indices) names.push_back(specs[idx].name);
    out["params"] = names;
    out["matrix"] = matrix_json(cov.matrix);
    OrderedJson cyc = OrderedJson::array();
    for (const auto& c : cov.cyclic) {
        cyc.push_back(OrderedJson{{"param", specs[c.index].name},
                                  {"mean_cos", c.mean_cos},
                                  {"mean_sin", c.mean_sin},
                                  {"mean_angle", c.mean_angle},
                                  {"circular_variance", c.circular_variance}});
    }
    out["cyclic"] = cyc;
    return out;
}

OrderedJson sampler_json(const PosteriorSamples& samples) {
    const auto& d = samples.diag;
    return OrderedJson{{"chains", d.chains},
                       {"rounds", d.rounds},
                       {"round_sizes", d.round_sizes},
                       {"k_final", d.k_final},
                       {"samples", samples.size()},
                       {"converged", d.converged}};
}

OrderedJson efficiencies_json(const std::vector<EfficiencyPosterior>& effs) {
    OrderedJson out = OrderedJson::array();
    for (const auto& e : effs) {
        out.push_back(OrderedJson{{"basis", e.label},
                                  {"a0", mean_std_json(e.a0)},
                                  {"a1", mean_std_json(e.a1)},
                                  {"b0", mean_std_json(e.b0)},
                                  {"b1", mean_std_json(e.b1)}});
    }
    return out;
}

OrderedJson point_efficiencies_json(const EfficiencySet& eff,
                                    const std::vector<std::string>& labels) {
    OrderedJson out = OrderedJson::array();
    for (std::size_t i = 0; i < eff.values.size(); ++i) {
        const auto& v = eff.values[i];
        out.push_back(OrderedJson{
            {"basis", eff.mode == EfficiencyMode::Shared ? "shared" : labels.at(i)},
            {"a0", v.a0},
            {"a1", v.a1},
            {"b0", v.b0},
            {"b1", v.b1}});
    }
    return out;
}

OrderedJson fidelity_json(const std::string& name, double value,
                          std::optional<double> posterior_std) {
    OrderedJson out{{"target", name}, {"value", value}};
    if (posterior_std) out["posterior_std"] = *posterior_std;
    return out;
}

const std::array<Matrix, 4>& pauli_matrices() {
    static const std::array<Matrix, 4> ops = [] {
        std::array<Matrix, 4> m;
        for (auto& e : m) e.resize(2, 2);
        m[0] << 1, 0, 0, 1;
        m[1] << 1, 0, 0, -1;                                          // Z
        m[2] << 0, 1, 1, 0;                                           // X
        m[3] << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);  // Y
        return m;
    }();
    return ops;
}

}  // namespace

CVector psi_plus() {
    CVector psi = CVector::Zero(4);
    psi(1) = 1.0 / std::sqrt(2.0);
    psi(2) = 1.0 / std::sqrt(2.0);
    return psi;
}

OrderedJson density_json(const DensityMatrix& rho) {
    return OrderedJson::parse(density_to_json(rho));
}

OrderedJson expectation_summary_json(const DensityMatrix& rho) {
    OrderedJson out;
    if (rho.dim() == 2) {
        const BlochVector b = pauli_expectations(rho);
        out["bloch"] = OrderedJson{{"z", b.z}, {"x", b.x}, {"y", b.y}};
        out["bloch_norm"] = b.norm();
        return out;
    }
    const char* names = "IZXY";
    const auto& ops = pauli_matrices();
    OrderedJson pauli;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            if (a == 0 && b == 0) continue;
            Matrix op(4, 4);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    op.block<2, 2>(2 * i, 2 * j) = ops[a](i, j) * ops[b];
            const std::string key{names[a], names[b]};
            pauli[key] = (rho.matrix() * op).trace().real();
        }
    out["pauli"] = pauli;
    return out;
}

FidelitySummary fidelity_summary(const StateBme& est, const CVector& psi) {
    FidelitySummary out;
    out.value = fidelity_with_pure(est.rho_bar, psi);
    const int R = est.samples.size();
    const int kt = est.layout.tau_count();
    double sum = 0.0, sum_sq = 0.0;
    std::vector<double> x(kt);
    for (int r = 0; r < R; ++r) {
        for (int i = 0; i < kt; ++i) x[i] = est.samples.draws(r, i);
        const double f = fidelity_with_pure(
            density_from_params(HypersphericalParams::from_flat(est.layout.n, x)), psi);
        sum += f;
        sum_sq += f * f;
    }
    const double mean = sum / R;
    out.posterior_std =
        R > 1 ? std::sqrt(std::max(0.0, (sum_sq - R * mean * mean) / (R - 1))) : 0.0;
    return out;
}

OrderedJson state_bme_report(const StateBme& est, std::uint64_t seed,
                             const std::optional<TargetState>& target) {
    OrderedJson out;
    out["method"] = "bme";
    out["mode"] = "state";
    out["seed"] = seed;
    out["matrix"] = density_json(est.rho_bar);
    out["expectations"] = expectation_summary_json(est.rho_bar);
    out["covariance"] = covariance_json(parameter_covariance(est.samples),
                                        est.samples.specs);
    out["trace_distance_deviation"] = est.trace_distance_dev;
    OrderedJson nbar = OrderedJson::array();
    for (const auto& [label, ms] : est.mean_photon)
        nbar.push_back(
            OrderedJson{{"basis", label}, {"mean", ms.mean}, {"std", ms.std}});
    out["mean_photon_number"] = nbar;
    out["efficiencies"] = efficiencies_json(est.efficiencies);
    if (target) {
        const FidelitySummary f = fidelity_summary(est, target->psi);
        out["fidelity"] = fidelity_json(target->name, f.value, f.posterior_std);
    }
    out["sampler"] = sampler_json(est.samples);
    return out;
}

OrderedJson raw_single_basis_report(const RawSingleBasisEstimate& est,
                                    std::uint64_t seed) {
    OrderedJson out;
    out["method"] = "bme";
    out["mode"] = "single_basis";
    out["seed"] = seed;
    out["parameters"] = OrderedJson{
        {"p00", mean_std_json(est.p00)}, {"p01", mean_std_json(est.p01)},
        {"p10", mean_std_json(est.p10)}, {"p11", mean_std_json(est.p11)},
        {"a0", mean_std_json(est.a0)},   {"a1", mean_std_json(est.a1)},
        {"b0", mean_std_json(est.b0)},   {"b1", mean_std_json(est.b1)}};
    out["mean_photon_number"] = mean_std_json(est.pair_number);
    out["covariance"] = covariance_json(parameter_covariance(est.samples),
                                        est.samples.specs);
    out["sampler"] = sampler_json(est.samples);
    return out;
}

OrderedJson experiment_mle_report(const ExperimentMle& est,
                                  const std::vector<std::string>& basis_labels,
                                  std::uint64_t seed,
                                  const std::optional<TargetState>& target) {
    const DensityMatrix rho = density_from_params(est.tau);
    OrderedJson out;
    out["method"] = "mle";
    out["mode"] = "state";
    out["seed"] = seed;
    out["matrix"] = density_json(rho);
    out["expectations"] = expectation_summary_json(rho);
    out["log_likelihood"] = est.log_value;
    out["ridge"] = est.ridge;
    out["efficiencies"] = point_efficiencies_json(est.eff, basis_labels);
    if (target)
        out["fidelity"] =
            fidelity_json(target->name, fidelity_with_pure(rho, target->psi),
                          std::nullopt);
    return out;
}

OrderedJson traditional_mle_report(const HypersphericalParams& tau,
                                   const PathwayEfficiencies& eff, std::uint64_t seed,
                                   const std::optional<TargetState>& target) {
    const DensityMatrix rho = density_from_params(tau);
    OrderedJson out;
    out["method"] = "mle-traditional";
    out["mode"] = "state";
    out["seed"] = seed;
    out["matrix"] = density_json(rho);
    out["expectations"] = expectation_summary_json(rho);
    out["known_efficiencies"] =
        OrderedJson{{"a0", eff.a0}, {"a1", eff.a1}, {"b0", eff.b0}, {"b1", eff.b1}};
    if (target)
        out["fidelity"] =
            fidelity_json(target->name, fidelity_with_pure(rho, target->psi),
                          std::nullopt);
    return out;
}

OrderedJson single_qubit_lie_report(const LieEstimate& est) {
    OrderedJson out;
    out["method"] = "lie";
    out["bloch"] = OrderedJson{{"z", est.bloch.z}, {"x", est.bloch.x}, {"y", est.bloch.y}};
    out["bloch_norm"] = est.bloch.norm();
    out["physical"] = est.physical;
    return out;
}

OrderedJson single_qubit_mle_report(const SingleQubitMle& est) {
    OrderedJson out;
    out["method"] = "mle";
    out["bloch"] = OrderedJson{{"z", est.bloch.z}, {"x", est.bloch.x}, {"y", est.bloch.y}};
    out["bloch_norm"] = est.bloch.norm();
    out["on_boundary"] = est.on_boundary;
    out["matrix"] = density_json(density_from_params(est.tau));
    out["log_likelihood"] = est.log_likelihood;
    return out;
}

OrderedJson single_qubit_bme_report(const SingleQubitBme& est) {
    const BlochVector b = pauli_expectations(est.rho);
    OrderedJson out;
    out["method"] = "bme";
    out["bloch"] = OrderedJson{{"z", b.z}, {"x", b.x}, {"y", b.y}};
    out["bloch_norm"] = b.norm();
    out["matrix"] = density_json(est.rho);
    out["sampled_fallback"] = est.sampled_fallback;
    out["precision_warning"] = est.precision_warning;
    return out;
}

OrderedJson single_qubit_laplace_report(const LaplaceReport& report) {
    OrderedJson out;
    out["method"] = "laplace";
    out["tau"] = OrderedJson{{"u", report.tau.u[0]},
                             {"theta", report.tau.theta[0]},
                             {"phi", report.tau.phi[0]}};
    out["hessian"] = matrix_json(report.hessian);
    out["covariance"] = matrix_json(report.covariance);
    out["positive_definite"] = report.positive_definite;
    return out;
}

OrderedJson error_json(const std::string& kind, const std::string& message) {
    return OrderedJson{{"error", OrderedJson{{"type", kind}, {"message", message}}}};
}

}  // namespace qtomo
