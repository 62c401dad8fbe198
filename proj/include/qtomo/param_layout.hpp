#pragma once

#include <span>
#include <vector>

#include "qtomo/dataset.hpp"
#include "qtomo/density.hpp"
#include "qtomo/likelihood.hpp"
#include "qtomo/sampler.hpp"

namespace qtomo {

// Flat parameter vector shared by the samplers and maximizers working on a
// tomography dataset: state angles first, then one pathway-efficiency block
// (shared mode) or one block per basis record.
struct ParamLayout {
    int n = 4;
    EfficiencyMode mode = EfficiencyMode::Shared;
    std::vector<std::string> basis_labels;  // per-basis mode only

    static ParamLayout for_dataset(const TomographyDataset& ds, int n = 4);

    int tau_count() const { return n * n - 1; }
    int eff_sets() const {
        return mode == EfficiencyMode::Shared
                   ? 1
                   : static_cast<int>(basis_labels.size());
    }
    int total() const { return tau_count() + 4 * eff_sets(); }

    std::vector<ParamSpec> specs() const;
    HypersphericalParams tau_of(std::span<const double> x) const;
    EfficiencySet eff_of(std::span<const double> x) const;
};

}  // namespace qtomo
