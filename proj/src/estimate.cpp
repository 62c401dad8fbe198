#include "qtomo/estimate.hpp"

#include <cmath>
#include <stdexcept>

#include "qtomo/logspace.hpp"

namespace qtomo {

StateBme bme_state_estimate(const TomographyDataset& ds, const BmeOptions& opts) {
    ds.validate();
    if (ds.records.empty())
        throw std::invalid_argument("bme_state_estimate: empty dataset");

    const ParamLayout layout = ParamLayout::for_dataset(ds);
    const auto specs = layout.specs();

    auto target = [&ds, &layout, prior = opts.prior](std::span<const double> x) {
        const HypersphericalParams tau = layout.tau_of(x);
        const EfficiencySet eff = layout.eff_of(x);
        const double ll = multi_basis_log_likelihood(ds, tau, eff);
        if (ll == kNegInfinity) return kNegInfinity;
        if (prior == StatePrior::FlatAngles) return ll;
        const double measure =
            metric_determinant_sqrt_cached(x.subspan(0, layout.tau_count()), layout.n);
        if (measure <= 0.0) return kNegInfinity;
        return ll + std::log(measure);
    };

    PosteriorSamples samples = run_chains(target, specs, opts.burnin, opts.seed);
    DensityMatrix rho_bar = posterior_mean_density(samples, layout.n, 0);
    const double dd = trace_distance_deviation(samples, rho_bar, 0);

    const int R = samples.size();
    const int kt = layout.tau_count();

    // Per-basis pair-number posteriors need p(tau) per sample.
    std::vector<std::vector<std::pair<JointProbabilities, PathwayEfficiencies>>>
        per_basis(ds.records.size());
    for (auto& v : per_basis) v.reserve(R);
    std::vector<double> x(samples.dim());
    for (int r = 0; r < R; ++r) {
        for (int i = 0; i < samples.dim(); ++i) x[i] = samples.draws(r, i);
        const DensityMatrix rho = density_from_params(layout.tau_of(x));
        const EfficiencySet eff = layout.eff_of(x);
        for (std::size_t b = 0; b < ds.records.size(); ++b) {
            const auto& rec = ds.records[b];
            per_basis[b].emplace_back(
                joint_outcome_probabilities(rho, rec.basis.alice, rec.basis.bob),
                eff.for_record(b));
        }
    }

    StateBme out{std::move(rho_bar), std::move(samples), layout, dd, {}, {},
                 false};
    out.converged = out.samples.diag.converged;
    for (std::size_t b = 0; b < ds.records.size(); ++b)
        out.mean_photon.emplace_back(
            ds.records[b].basis.label(),
            mean_photon_number(ds.records[b].counts, per_basis[b]));

    for (int e = 0; e < layout.eff_sets(); ++e) {
        EfficiencyPosterior ep;
        ep.label = layout.mode == EfficiencyMode::Shared ? "shared"
                                                         : layout.basis_labels[e];
        const int base = kt + 4 * e;
        ep.a0 = column_mean_std(out.samples, base);
        ep.a1 = column_mean_std(out.samples, base + 1);
        ep.b0 = column_mean_std(out.samples, base + 2);
        ep.b1 = column_mean_std(out.samples, base + 3);
        out.efficiencies.push_back(std::move(ep));
    }
    return out;
}

RawSingleBasisEstimate single_basis_raw_estimate(const SingleBasisCounts& counts,
                                                 const BurnInConfig& burnin,
                                                 std::uint64_t seed) {
    counts.validate();

    std::vector<ParamSpec> specs = {
        {"p00", 0.0, 1.0, false, 0.0}, {"p01", 0.0, 1.0, false, 0.0},
        {"p10", 0.0, 1.0, false, 0.0}, {"a0", 0.0, 1.0, false, 0.0},
        {"a1", 0.0, 1.0, false, 0.0},  {"b0", 0.0, 1.0, false, 0.0},
        {"b1", 0.0, 1.0, false, 0.0},
    };
    // The three free probabilities live on the simplex; each conditional is
    // bounded by what the other two leave over.
    auto bounds = [](int i, std::span<const double> x) -> std::pair<double, double> {
        switch (i) {
            case 0: return {0.0, std::max(0.0, 1.0 - x[1] - x[2])};
            case 1: return {0.0, std::max(0.0, 1.0 - x[0] - x[2])};
            case 2: return {0.0, std::max(0.0, 1.0 - x[0] - x[1])};
            default: return {0.0, 1.0};
        }
    };
    auto target = [&counts](std::span<const double> x) {
        const double p11 = 1.0 - x[0] - x[1] - x[2];
        if (p11 < 0.0) return kNegInfinity;
        const JointProbabilities p{x[0], x[1], x[2], p11};
        const PathwayEfficiencies eff{x[3], x[4], x[5], x[6]};
        return log_likelihood_marginal_N(counts, p, eff);
    };

    PosteriorSamples samples = run_chains(target, specs, burnin, seed, bounds);
    const int R = samples.size();

    std::vector<std::pair<JointProbabilities, PathwayEfficiencies>> alpha;
    alpha.reserve(R);
    double p11_sum = 0.0, p11_sq = 0.0;
    for (int r = 0; r < R; ++r) {
        const double p11 =
            1.0 - samples.draws(r, 0) - samples.draws(r, 1) - samples.draws(r, 2);
        p11_sum += p11;
        p11_sq += p11 * p11;
        alpha.emplace_back(
            JointProbabilities{samples.draws(r, 0), samples.draws(r, 1),
                               samples.draws(r, 2), p11},
            PathwayEfficiencies{samples.draws(r, 3), samples.draws(r, 4),
                                samples.draws(r, 5), samples.draws(r, 6)});
    }
    const double p11_mean = p11_sum / R;
    const double p11_var =
        R > 1 ? std::max(0.0, (p11_sq - R * p11_mean * p11_mean) / (R - 1)) : 0.0;

    RawSingleBasisEstimate out{
        column_mean_std(samples, 0),
        column_mean_std(samples, 1),
        column_mean_std(samples, 2),
        {p11_mean, std::sqrt(p11_var)},
        column_mean_std(samples, 3),
        column_mean_std(samples, 4),
        column_mean_std(samples, 5),
        column_mean_std(samples, 6),
        mean_photon_number(counts, alpha),
        std::move(samples),
        false,
    };
    out.converged = out.samples.diag.converged;
    return out;
}

}  // namespace qtomo
