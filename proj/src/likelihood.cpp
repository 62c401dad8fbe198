#include "qtomo/likelihood.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "qtomo/logspace.hpp"

namespace qtomo {

namespace {

// Outcome-0 projector per single-qubit basis; outcome 1 is its complement.
// X and Y come from the waveplate operations (H, then Q then H) ahead of a
// computational-basis detector.
Matrix outcome0_projector(Basis b) {
    Matrix p(2, 2);
    switch (b) {
        case Basis::Z:
            p << 1, 0, 0, 0;
            break;
        case Basis::X:
            p << 0.5, 0.5, 0.5, 0.5;
            break;
        case Basis::Y:
            p << Complex(0.5, 0.0), Complex(0.0, 0.5), Complex(0.0, -0.5),
                Complex(0.5, 0.0);
            break;
    }
    return p;
}

Matrix kron2(const Matrix& a, const Matrix& b) {
    Matrix out(4, 4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

struct ProjectorTable {
    // [alice][bob][i*2+j] -> P_i^A x P_j^B
    std::array<std::array<std::array<Matrix, 4>, 3>, 3> joint;

    ProjectorTable() {
        const Matrix id = Matrix::Identity(2, 2);
        for (int a = 0; a < 3; ++a) {
            const Matrix pa0 = outcome0_projector(static_cast<Basis>(a));
            const std::array<Matrix, 2> pa{pa0, id - pa0};
            for (int b = 0; b < 3; ++b) {
                const Matrix pb0 = outcome0_projector(static_cast<Basis>(b));
                const std::array<Matrix, 2> pb{pb0, id - pb0};
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j)
                        joint[a][b][i * 2 + j] = kron2(pa[i], pb[j]);
            }
        }
    }
};

const ProjectorTable& projectors() {
    static const ProjectorTable table;
    return table;
}

}  // namespace

void JointProbabilities::validate() const {
    for (double v : {p00, p01, p10, p11})
        if (!(v >= -1e-14))
            throw std::invalid_argument("JointProbabilities: negative probability");
    if (std::abs(sum() - 1.0) > 1e-9)
        throw std::invalid_argument("JointProbabilities: probabilities do not sum to 1");
}

JointProbabilities joint_outcome_probabilities(const DensityMatrix& rho, Basis alice,
                                               Basis bob) {
    if (rho.dim() != 4)
        throw std::invalid_argument("joint_outcome_probabilities: 4x4 state required");
    const auto& table = projectors().joint[static_cast<int>(alice)][static_cast<int>(bob)];
    auto prob = [&](int i, int j) {
        // Tr(rho M) without forming the product
        const Matrix& m = table[i * 2 + j];
        Complex acc = 0.0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) acc += rho.matrix()(a, b) * m(b, a);
        return acc.real();
    };
    return {prob(0, 0), prob(0, 1), prob(1, 0), prob(1, 1)};
}

double pair_loss_probability(const JointProbabilities& p,
                             const PathwayEfficiencies& eff) {
    return p.p00 * (1 - eff.a0) * (1 - eff.b0) + p.p01 * (1 - eff.a0) * (1 - eff.b1) +
           p.p10 * (1 - eff.a1) * (1 - eff.b0) + p.p11 * (1 - eff.a1) * (1 - eff.b1);
}

double log_likelihood_known_N(const SingleBasisCounts& counts, long long N,
                              const JointProbabilities& p,
                              const PathwayEfficiencies& eff) {
    counts.validate();
    const long long pairs_seen = counts.s() - counts.n();
    if (N < pairs_seen)
        throw std::domain_error("log_likelihood_known_N: N below s - n");

    const long long a_only0 = counts.A0 - counts.c00 - counts.c01;
    const long long a_only1 = counts.A1 - counts.c10 - counts.c11;
    const long long b_only0 = counts.B0 - counts.c00 - counts.c10;
    const long long b_only1 = counts.B1 - counts.c01 - counts.c11;
    const long long lost = N - pairs_seen;

    auto lfact = [](long long k) { return std::lgamma(static_cast<double>(k + 1)); };
    const double log_gamma = lfact(N) - lfact(lost) - lfact(a_only0) - lfact(a_only1) -
                             lfact(b_only0) - lfact(b_only1) - lfact(counts.c00) -
                             lfact(counts.c01) - lfact(counts.c10) - lfact(counts.c11);

    const double g = pair_loss_probability(p, eff);
    return log_gamma +
           xlogp(static_cast<double>(counts.c00), eff.a0 * eff.b0 * p.p00) +
           xlogp(static_cast<double>(counts.c01), eff.a0 * eff.b1 * p.p01) +
           xlogp(static_cast<double>(counts.c10), eff.a1 * eff.b0 * p.p10) +
           xlogp(static_cast<double>(counts.c11), eff.a1 * eff.b1 * p.p11) +
           xlogp(static_cast<double>(a_only0),
                 eff.a0 * (p.p00 * (1 - eff.b0) + p.p01 * (1 - eff.b1))) +
           xlogp(static_cast<double>(a_only1),
                 eff.a1 * (p.p10 * (1 - eff.b0) + p.p11 * (1 - eff.b1))) +
           xlogp(static_cast<double>(b_only0),
                 eff.b0 * (p.p00 * (1 - eff.a0) + p.p10 * (1 - eff.a1))) +
           xlogp(static_cast<double>(b_only1),
                 eff.b1 * (p.p01 * (1 - eff.a0) + p.p11 * (1 - eff.a1))) +
           xlogp(static_cast<double>(lost), g);
}

double log_likelihood_marginal_N(const SingleBasisCounts& counts,
                                 const JointProbabilities& p,
                                 const PathwayEfficiencies& eff) {
    counts.validate();
    const double g = pair_loss_probability(p, eff);
    if (g >= 1.0 - 1e-15) return kNegInfinity;

    const double exponent =
        static_cast<double>(counts.n() - counts.s()) - 1.0;  // always negative
    return xlogp(static_cast<double>(counts.A0), eff.a0) +
           xlogp(static_cast<double>(counts.A1), eff.a1) +
           xlogp(static_cast<double>(counts.B0), eff.b0) +
           xlogp(static_cast<double>(counts.B1), eff.b1) +
           xlogp(static_cast<double>(counts.c00), p.p00) +
           xlogp(static_cast<double>(counts.c01), p.p01) +
           xlogp(static_cast<double>(counts.c10), p.p10) +
           xlogp(static_cast<double>(counts.c11), p.p11) +
           xlogp(static_cast<double>(counts.A0 - counts.c00 - counts.c01),
                 p.p00 * (1 - eff.b0) + p.p01 * (1 - eff.b1)) +
           xlogp(static_cast<double>(counts.A1 - counts.c10 - counts.c11),
                 p.p10 * (1 - eff.b0) + p.p11 * (1 - eff.b1)) +
           xlogp(static_cast<double>(counts.B0 - counts.c00 - counts.c10),
                 p.p00 * (1 - eff.a0) + p.p10 * (1 - eff.a1)) +
           xlogp(static_cast<double>(counts.B1 - counts.c01 - counts.c11),
                 p.p01 * (1 - eff.a0) + p.p11 * (1 - eff.a1)) +
           exponent * std::log1p(-g);
}

namespace {

double dataset_log_likelihood(const TomographyDataset& ds,
                              const HypersphericalParams& tau,
                              const EfficiencySet& eff) {
    if (eff.mode != ds.efficiency_mode)
        throw std::invalid_argument("efficiency mode does not match dataset");
    if (eff.mode == EfficiencyMode::PerBasis &&
        eff.values.size() != ds.records.size())
        throw std::invalid_argument("per-basis efficiency count mismatch");

    const DensityMatrix rho = density_from_params(tau);
    // Summed in sorted order so the value is exactly invariant under
    // permutations of the basis records.
    std::vector<double> terms;
    terms.reserve(ds.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        const auto& rec = ds.records[i];
        const JointProbabilities p =
            joint_outcome_probabilities(rho, rec.basis.alice, rec.basis.bob);
        const double ll =
            rec.pair_count
                ? log_likelihood_known_N(rec.counts, *rec.pair_count, p,
                                         eff.for_record(i))
                : log_likelihood_marginal_N(rec.counts, p, eff.for_record(i));
        if (ll == kNegInfinity) return kNegInfinity;
        terms.push_back(ll);
    }
    std::sort(terms.begin(), terms.end());
    double total = 0.0;
    for (double t : terms) total += t;
    return total;
}

}  // namespace

double multi_basis_log_likelihood(const TomographyDataset& ds,
                                  const HypersphericalParams& tau,
                                  const EfficiencySet& eff) {
    return dataset_log_likelihood(ds, tau, eff);
}

double multi_basis_log_posterior(const TomographyDataset& ds,
                                 const HypersphericalParams& tau,
                                 const EfficiencySet& eff) {
    const double ll = dataset_log_likelihood(ds, tau, eff);
    if (ll == kNegInfinity) return kNegInfinity;
    const std::vector<double> flat = tau.flatten();
    const double measure = metric_determinant_sqrt_cached(flat, tau.n);
    if (measure <= 0.0) return kNegInfinity;
    return ll + std::log(measure);
}

CorrectedCounts traditional_corrected_counts(const SingleBasisCounts& counts,
                                             const PathwayEfficiencies& eff) {
    eff.validate();
    if (eff.a0 <= 0.0 || eff.a1 <= 0.0 || eff.b0 <= 0.0 || eff.b1 <= 0.0)
        throw std::domain_error(
            "traditional_corrected_counts: zero efficiency, correction undefined");
    const double am = std::min(eff.a0, eff.a1);
    const double bm = std::min(eff.b0, eff.b1);
    CorrectedCounts k;
    k.k00 = am * bm / (eff.a0 * eff.b0) * counts.c00;
    k.k01 = am * bm / (eff.a0 * eff.b1) * counts.c01;
    k.k10 = am * bm / (eff.a1 * eff.b0) * counts.c10;
    k.k11 = am * bm / (eff.a1 * eff.b1) * counts.c11;
    return k;
}

double traditional_log_likelihood(const CorrectedCounts& k,
                                  const JointProbabilities& p) {
    return xlogp(k.k00, p.p00) + xlogp(k.k01, p.p01) + xlogp(k.k10, p.p10) +
           xlogp(k.k11, p.p11);
}

MeanStd mean_photon_number(
    const SingleBasisCounts& counts,
    std::span<const std::pair<JointProbabilities, PathwayEfficiencies>> samples) {
    if (samples.empty())
        throw std::invalid_argument("mean_photon_number: empty sample set");
    const double seen = static_cast<double>(counts.s() - counts.n());
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& [p, eff] : samples) {
        const double g = pair_loss_probability(p, eff);
        const double nbar = (seen + g) / (1.0 - g);
        sum += nbar;
        sum_sq += nbar * nbar;
    }
    const double count = static_cast<double>(samples.size());
    const double mean = sum / count;
    const double var =
        count > 1 ? std::max(0.0, (sum_sq - count * mean * mean) / (count - 1)) : 0.0;
    return {mean, std::sqrt(var)};
}

}  // namespace qtomo
