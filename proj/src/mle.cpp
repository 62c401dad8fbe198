#include "qtomo/mle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qtomo/logspace.hpp"
#include "qtomo/param_layout.hpp"

namespace qtomo {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_unit(double v) {
    double y = std::fmod(v, 1.0);
    if (y < 0.0) y += 1.0;
    return y;
}

}  // namespace

ParamLayout ParamLayout::for_dataset(const TomographyDataset& ds, int n) {
    ParamLayout layout;
    layout.n = n;
    layout.mode = ds.efficiency_mode;
    if (layout.mode == EfficiencyMode::PerBasis)
        for (const auto& rec : ds.records) layout.basis_labels.push_back(rec.basis.label());
    return layout;
}

std::vector<ParamSpec> ParamLayout::specs() const {
    std::vector<ParamSpec> out;
    const auto names = HypersphericalParams::param_names(n);
    const int nu = n - 1;
    const int nt = n * (n - 1) / 2;
    for (int i = 0; i < tau_count(); ++i) {
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
        out.push_back(std::move(s));
    }
    for (int e = 0; e < eff_sets(); ++e) {
        const std::string prefix =
            mode == EfficiencyMode::Shared ? "" : basis_labels[e] + ".";
        for (const char* name : {"a0", "a1", "b0", "b1"})
            out.push_back({prefix + name, 0.0, 1.0, false, 0.0});
    }
    return out;
}

HypersphericalParams ParamLayout::tau_of(std::span<const double> x) const {
    return HypersphericalParams::from_flat(n, x.subspan(0, tau_count()));
}

EfficiencySet ParamLayout::eff_of(std::span<const double> x) const {
    EfficiencySet eff;
    eff.mode = mode;
    for (int e = 0; e < eff_sets(); ++e) {
        const std::size_t base = tau_count() + 4 * e;
        eff.values.push_back({x[base], x[base + 1], x[base + 2], x[base + 3]});
    }
    return eff;
}

std::vector<double> finite_diff_gradient(const LogDensity& log_target,
                                         std::span<const double> x,
                                         std::span<const ParamSpec> box, double h) {
    const int k = static_cast<int>(x.size());
    std::vector<double> probe(x.begin(), x.end());
    std::vector<double> grad(k, 0.0);
    double f0 = std::numeric_limits<double>::quiet_NaN();  // computed on demand

    for (int i = 0; i < k; ++i) {
        double lo, hi;
        if (box[i].cyclic) {
            lo = x[i] - h;
            hi = x[i] + h;
        } else {
            lo = std::max(box[i].lower, x[i] - h);
            hi = std::min(box[i].upper, x[i] + h);
        }
        if (!(hi > lo)) {
            grad[i] = 0.0;
            continue;
        }
        probe[i] = box[i].cyclic ? box[i].wrap(hi) : hi;
        double f_hi = log_target(probe);
        probe[i] = box[i].cyclic ? box[i].wrap(lo) : lo;
        double f_lo = log_target(probe);
        probe[i] = x[i];

        if (!std::isfinite(f_hi) || !std::isfinite(f_lo)) {
            if (std::isnan(f0)) f0 = log_target(x);
            if (!std::isfinite(f0))
                throw std::runtime_error("finite_diff_gradient: target not finite at x");
            if (std::isfinite(f_hi)) {
                grad[i] = (f_hi - f0) / (hi - x[i]);
            } else if (std::isfinite(f_lo)) {
                grad[i] = (f0 - f_lo) / (x[i] - lo);
            } else {
                throw std::runtime_error(
                    "finite_diff_gradient: both probes non-finite for " + box[i].name);
            }
        } else {
            grad[i] = (f_hi - f_lo) / (hi - lo);
        }
    }
    return grad;
}

AscentResult gradient_ascent(const LogDensity& log_target, std::vector<double> x0,
                             std::span<const ParamSpec> box, const AscentConfig& config,
                             Rng& rng) {
    const int k = static_cast<int>(x0.size());
    if (static_cast<int>(box.size()) != k)
        throw std::invalid_argument("gradient_ascent: box/point size mismatch");

    double value = log_target(x0);
    for (int attempt = 0; attempt < 100 && !std::isfinite(value); ++attempt) {
        for (int i = 0; i < k; ++i) x0[i] = rng.uniform(box[i].lower, box[i].upper);
        value = log_target(x0);
    }
    if (!std::isfinite(value))
        throw std::runtime_error("gradient_ascent: no finite starting point");

    // Work in box-normalized coordinates so one step size spans parameters
    // of different ranges.
    std::vector<double> xn(k);
    for (int i = 0; i < k; ++i) xn[i] = (x0[i] - box[i].lower) / box[i].range();
    auto raw = [&](const std::vector<double>& nx) {
        std::vector<double> out(k);
        for (int i = 0; i < k; ++i) out[i] = box[i].lower + nx[i] * box[i].range();
        return out;
    };

    double w = config.w0;
    long long iter = 0;
    std::vector<double> dir(k, 0.0);
    bool fresh_direction_needed = true;
    std::vector<double> x = x0;

    while (w >= config.w_min && iter < config.max_iterations) {
        ++iter;
        if (fresh_direction_needed) {
            const auto grad = finite_diff_gradient(log_target, x, box, config.h);
            double norm_sq = 0.0;
            for (int i = 0; i < k; ++i) {
                dir[i] = grad[i] * box[i].range();  // gradient in normalized coords
                norm_sq += dir[i] * dir[i];
            }
            if (norm_sq == 0.0) break;  // stationary point
            const double inv = 1.0 / std::sqrt(norm_sq);
            for (double& d : dir) d *= inv;
            fresh_direction_needed = false;
        }

        std::vector<double> cand_n(k);
        for (int i = 0; i < k; ++i) {
            const double v = xn[i] + w * dir[i];
            cand_n[i] = box[i].cyclic ? wrap_unit(v) : std::clamp(v, 0.0, 1.0);
        }
        if (cand_n == xn) {  // projected back onto the current point
            w /= 2.0;
            continue;
        }
        const auto cand = raw(cand_n);
        const double cand_value = log_target(cand);
        if (cand_value >= value) {
            xn = std::move(cand_n);
            x = cand;
            value = cand_value;
            w *= 2.0;
            fresh_direction_needed = true;
        } else {
            w /= 2.0;
        }
    }
    return {std::move(x), value, iter};
}

namespace {

struct StartOutcome {
    AscentResult result;
    bool failed = false;
};

// Maximum normalized coordinate distance, wrapping cyclic coordinates.
double normalized_distance(std::span<const double> a, std::span<const double> b,
                           std::span<const ParamSpec> box) {
    double dist = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = std::abs(a[i] - b[i]) / box[i].range();
        if (box[i].cyclic) {
            d = std::fmod(d, 1.0);
            d = std::min(d, 1.0 - d);
        }
        dist = std::max(dist, d);
    }
    return dist;
}

std::vector<StartOutcome> multistart(const LogDensity& target,
                                     std::span<const ParamSpec> box,
                                     const AscentConfig& config, std::uint64_t seed) {
    const int starts = std::max(1, config.multistarts);
    std::vector<StartOutcome> outcomes(starts);
    parallel_for(starts, [&](int j) {
        Rng rng = Rng::derive(seed, {kMleStream, static_cast<std::uint64_t>(j)});
        std::vector<double> x0;
        for (const auto& s : box) x0.push_back(rng.uniform(s.lower, s.upper));
        try {
            outcomes[j].result = gradient_ascent(target, std::move(x0), box, config, rng);
        } catch (const std::runtime_error&) {
            outcomes[j].failed = true;
        }
    });
    return outcomes;
}

std::pair<std::vector<double>, double> pick_best(
    const std::vector<StartOutcome>& outcomes, std::span<const ParamSpec> box,
    bool* ridge) {
    int best = -1;
    for (int j = 0; j < static_cast<int>(outcomes.size()); ++j) {
        if (outcomes[j].failed) continue;
        if (best < 0 || outcomes[j].result.value > outcomes[best].result.value) best = j;
    }
    if (best < 0) throw std::runtime_error("mle: every ascent start failed");
    if (ridge) {
        *ridge = false;
        const double value_tol =
            1e-6 * std::max(1.0, std::abs(outcomes[best].result.value));
        for (int j = 0; j < static_cast<int>(outcomes.size()); ++j) {
            if (j == best || outcomes[j].failed) continue;
            if (std::abs(outcomes[j].result.value - outcomes[best].result.value) <=
                    value_tol &&
                normalized_distance(outcomes[j].result.x, outcomes[best].result.x, box) >
                    1e-2) {
                *ridge = true;
                break;
            }
        }
    }
    return {outcomes[best].result.x, outcomes[best].result.value};
}

}  // namespace

ExperimentMle experiment_specific_mle(const TomographyDataset& ds,
                                      const AscentConfig& config, std::uint64_t seed) {
    ds.validate();
    const ParamLayout layout = ParamLayout::for_dataset(ds);
    const auto specs = layout.specs();
    auto target = [&](std::span<const double> x) {
        return multi_basis_log_likelihood(ds, layout.tau_of(x), layout.eff_of(x));
    };
    const auto outcomes = multistart(target, specs, config, seed);
    bool ridge = false;
    auto [x, value] = pick_best(outcomes, specs, &ridge);
    return {layout.tau_of(x), layout.eff_of(x), value, ridge};
}

HypersphericalParams traditional_mle(const TomographyDataset& ds,
                                     const PathwayEfficiencies& known_eff,
                                     const AscentConfig& config, std::uint64_t seed) {
    ds.validate();
    std::vector<CorrectedCounts> corrected;
    corrected.reserve(ds.records.size());
    for (const auto& rec : ds.records)
        corrected.push_back(traditional_corrected_counts(rec.counts, known_eff));

    ParamLayout layout;
    layout.n = 4;
    auto all_specs = layout.specs();
    std::vector<ParamSpec> specs(all_specs.begin(), all_specs.begin() + layout.tau_count());

    auto target = [&](std::span<const double> x) {
        const DensityMatrix rho = density_from_params(layout.tau_of(x));
        double total = 0.0;
        for (std::size_t i = 0; i < ds.records.size(); ++i) {
            const auto& rec = ds.records[i];
            const JointProbabilities p =
                joint_outcome_probabilities(rho, rec.basis.alice, rec.basis.bob);
            total += traditional_log_likelihood(corrected[i], p);
            if (total == kNegInfinity) break;
        }
        return total;
    };
    const auto outcomes = multistart(target, specs, config, seed);
    auto [x, value] = pick_best(outcomes, specs, nullptr);
    (void)value;
    return layout.tau_of(x);
}

}  // namespace qtomo
