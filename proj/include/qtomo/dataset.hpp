#pragma once

#include <optional>
#include <string>
#include <vector>

namespace qtomo {

enum class Basis { Z, X, Y };

char basis_char(Basis b);
Basis parse_basis(char c);

struct BasisPair {
    Basis alice = Basis::Z;
    Basis bob = Basis::Z;

    std::string label() const { return {basis_char(alice), basis_char(bob)}; }
    static BasisPair parse(const std::string& label);
};

// All nine basis combinations in the canonical order ZZ, ZX, ZY, XZ, ..., YY.
std::vector<BasisPair> all_basis_pairs();

// Singles and coincidences observed in one basis pair. Every coincidence
// contributes one count to each matching singles total, so c00 + c01 <= A0
// and so on; s and n are the singles and coincidence totals.
struct SingleBasisCounts {
    long long A0 = 0, A1 = 0, B0 = 0, B1 = 0;
    long long c00 = 0, c01 = 0, c10 = 0, c11 = 0;

    long long s() const { return A0 + A1 + B0 + B1; }
    long long n() const { return c00 + c01 + c10 + c11; }

    bool consistent() const;
    void validate() const;  // throws std::invalid_argument with the failing relation
};

// Probability that a photon destined for each detector survives to be counted.
struct PathwayEfficiencies {
    double a0 = 1.0, a1 = 1.0, b0 = 1.0, b1 = 1.0;
    void validate() const;  // each in [0, 1]
};

enum class EfficiencyMode { Shared, PerBasis };

struct BasisRecord {
    BasisPair basis;
    SingleBasisCounts counts;
    std::optional<long long> pair_count;  // N, when the source flux is known
};

struct TomographyDataset {
    std::vector<BasisRecord> records;
    EfficiencyMode efficiency_mode = EfficiencyMode::PerBasis;
    std::optional<SingleBasisCounts> dark;  // recorded but not subtracted

    // strict: counts invariants are errors; otherwise only duplicate basis
    // labels and shape problems are.
    void validate(bool strict = true) const;
    int efficiency_sets() const {
        return efficiency_mode == EfficiencyMode::Shared
                   ? 1
                   : static_cast<int>(records.size());
    }
};

std::string dataset_to_json(const TomographyDataset& ds);
TomographyDataset dataset_from_json(const std::string& text);

// CSV rows shaped Basis,A0,A1,B0,B1,c00,c01,c10,c11 with an optional header
// line and an optional terminal "Dark" row.
TomographyDataset dataset_from_csv(const std::string& text,
                                   EfficiencyMode mode = EfficiencyMode::PerBasis);

TomographyDataset load_dataset(const std::string& path);  // by extension
void save_dataset(const TomographyDataset& ds, const std::string& path);

}  // namespace qtomo
