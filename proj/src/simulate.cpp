#include "qtomo/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace qtomo {

SingleBasisCounts simulate_single_basis(const JointProbabilities& p,
                                        const PathwayEfficiencies& eff, long long N,
                                        Rng& rng) {
    p.validate();
    eff.validate();
    if (N < 0) throw std::invalid_argument("simulate_single_basis: negative N");

    // One categorical draw per pair over the 16 terminal outcomes:
    // destiny ij times survival pattern (both, Alice only, Bob only, none).
    const double pj[4] = {p.p00, p.p01, p.p10, p.p11};
    const double ai[2] = {eff.a0, eff.a1};
    const double bj[2] = {eff.b0, eff.b1};
    double cum[16];
    double acc = 0.0;
    for (int d = 0; d < 4; ++d) {
        const double a = ai[d / 2], b = bj[d % 2];
        acc += pj[d] * a * b;
        cum[4 * d + 0] = acc;
        acc += pj[d] * a * (1 - b);
        cum[4 * d + 1] = acc;
        acc += pj[d] * (1 - a) * b;
        cum[4 * d + 2] = acc;
        acc += pj[d] * (1 - a) * (1 - b);
        cum[4 * d + 3] = acc;
    }
    cum[15] = 1.0;

    long long counts[16] = {};
    for (long long k = 0; k < N; ++k) {
        const double v = rng.uniform();
        int lo = 0, hi = 15;
        while (lo < hi) {
            const int mid = (lo + hi) / 2;
            if (v < cum[mid])
                hi = mid;
            else
                lo = mid + 1;
        }
        ++counts[lo];
    }

    SingleBasisCounts out;
    long long* singlesA[2] = {&out.A0, &out.A1};
    long long* singlesB[2] = {&out.B0, &out.B1};
    long long* coinc[4] = {&out.c00, &out.c01, &out.c10, &out.c11};
    for (int d = 0; d < 4; ++d) {
        const int i = d / 2, j = d % 2;
        *coinc[d] += counts[4 * d + 0];
        *singlesA[i] += counts[4 * d + 0] + counts[4 * d + 1];
        *singlesB[j] += counts[4 * d + 0] + counts[4 * d + 2];
    }
    return out;
}

TomographyDataset simulate_tomography(const DensityMatrix& rho,
                                      const PathwayEfficiencies& eff, long long N,
                                      std::span<const BasisPair> bases, Rng& rng) {
    TomographyDataset ds;
    ds.efficiency_mode = EfficiencyMode::Shared;
    for (const BasisPair& basis : bases) {
        const JointProbabilities p =
            joint_outcome_probabilities(rho, basis.alice, basis.bob);
        ds.records.push_back({basis, simulate_single_basis(p, eff, N, rng), std::nullopt});
    }
    return ds;
}

double alt_prior_target(const HypersphericalParams& tau) {
    tau.validate();
    return 0.0;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double try_distance(const DensityMatrix& truth, const std::function<DensityMatrix()>& fn) {
    try {
        return trace_distance(fn(), truth);
    } catch (const std::exception&) {
        return kNaN;
    }
}

StudySummary summarize_estimator(const StudyReport& report, const std::string& name,
                                 double StudyCell::*dist) {
    StudySummary s;
    s.estimator = name;
    const int G = static_cast<int>(report.grid.size());
    s.mean_distance.assign(G, kNaN);
    s.failures.assign(G, 0);
    s.wins.assign(G, 0);
    s.comparisons.assign(G, 0);
    for (int g = 0; g < G; ++g) {
        double sum = 0.0;
        int ok = 0;
        for (const auto& cell : report.cells) {
            if (cell.pairs != report.grid[g]) continue;
            const double d = cell.*dist;
            if (std::isnan(d)) {
                ++s.failures[g];
                continue;
            }
            sum += d;
            ++ok;
            if (!std::isnan(cell.d_traditional)) {
                ++s.comparisons[g];
                if (d < cell.d_traditional) ++s.wins[g];
            }
        }
        if (ok > 0) s.mean_distance[g] = sum / ok;
    }
    return s;
}

}  // namespace

StudyReport run_performance_study(const StudyConfig& config) {
    StudyReport report;
    report.grid = config.grid;
    report.repetitions = config.repetitions;
    report.flat_prior_bme = config.flat_prior_bme;

    const auto bases = all_basis_pairs();
    for (std::size_t g = 0; g < config.grid.size(); ++g) {
        const long long N = config.grid[g];
        for (int rep = 0; rep < config.repetitions; ++rep) {
            auto sub = [&](std::uint64_t slot) {
                return Rng::derive(config.seed,
                                   {kStudyStream, g, static_cast<std::uint64_t>(rep), slot});
            };
            Rng state_rng = sub(0);
            const HypersphericalParams tau_true = haar_uniform_sample(state_rng, 4);
            const DensityMatrix rho_true = density_from_params(tau_true);

            Rng eff_rng = sub(1);
            const PathwayEfficiencies eff_true{eff_rng.uniform(), eff_rng.uniform(),
                                               eff_rng.uniform(), eff_rng.uniform()};

            Rng sim_rng = sub(2);
            const TomographyDataset ds =
                simulate_tomography(rho_true, eff_true, N, bases, sim_rng);
            const std::uint64_t est_seed = sub(3).next();

            StudyCell cell;
            cell.pairs = N;
            cell.repetition = rep;
            cell.d_traditional = try_distance(rho_true, [&] {
                return density_from_params(
                    traditional_mle(ds, eff_true, config.ascent, est_seed));
            });
            cell.d_mle = try_distance(rho_true, [&] {
                return density_from_params(
                    experiment_specific_mle(ds, config.ascent, est_seed).tau);
            });
            cell.d_bme = try_distance(rho_true, [&] {
                return bme_state_estimate(
                           ds, {config.bme_burnin, est_seed, StatePrior::Haar})
                    .rho_bar;
            });
            cell.d_bme_flat =
                config.flat_prior_bme
                    ? try_distance(rho_true,
                                   [&] {
                                       return bme_state_estimate(
                                                  ds, {config.bme_burnin, est_seed,
                                                       StatePrior::FlatAngles})
                                           .rho_bar;
                                   })
                    : kNaN;
            report.cells.push_back(cell);
        }
    }

    report.summaries.push_back(summarize_estimator(report, "bme", &StudyCell::d_bme));
    report.summaries.push_back(summarize_estimator(report, "mle", &StudyCell::d_mle));
    report.summaries.push_back(
        summarize_estimator(report, "mle-traditional", &StudyCell::d_traditional));
    if (config.flat_prior_bme)
        report.summaries.push_back(
            summarize_estimator(report, "bme-flat", &StudyCell::d_bme_flat));
    return report;
}

std::string study_report_json(const StudyReport& report) {
    using ordered = nlohmann::ordered_json;
    ordered root;
    root["grid"] = report.grid;
    root["repetitions"] = report.repetitions;
    ordered names = ordered::array();
    for (const auto& s : report.summaries) names.push_back(s.estimator);
    root["estimators"] = names;
    ordered mean, win, fail;
    for (const auto& s : report.summaries) {
        ordered md = ordered::array();
        for (double v : s.mean_distance)
            md.push_back(std::isnan(v) ? ordered(nullptr) : ordered(v));
        mean[s.estimator] = md;
        fail[s.estimator] = s.failures;
        if (s.estimator != "mle-traditional") {
            ordered wp = ordered::array();
            for (std::size_t g = 0; g < report.grid.size(); ++g)
                wp.push_back(s.comparisons[g] > 0
                                 ? ordered(100.0 * s.wins[g] / s.comparisons[g])
                                 : ordered(nullptr));
            win[s.estimator] = wp;
        }
    }
    root["mean_distance"] = mean;
    root["win_pct"] = win;
    root["failures"] = fail;
    return root.dump(2) + "\n";
}

std::string study_report_csv(const StudyReport& report) {
    std::ostringstream os;
    os << "N,repetition,d_bme,d_mle,d_traditional";
    if (report.flat_prior_bme) os << ",d_bme_flat";
    os << "\n";
    char buf[40];
    auto num = [&buf](double v) {
        if (std::isnan(v)) return std::string();
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (const auto& cell : report.cells) {
        os << cell.pairs << "," << cell.repetition << "," << num(cell.d_bme) << ","
           << num(cell.d_mle) << "," << num(cell.d_traditional);
        if (report.flat_prior_bme) os << "," << num(cell.d_bme_flat);
        os << "\n";
    }
    return os.str();
}

}  // namespace qtomo
