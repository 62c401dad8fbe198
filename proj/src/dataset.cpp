#include "qtomo/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace qtomo {

char basis_char(Basis b) {
    switch (b) {
        case Basis::Z: return 'Z';
        case Basis::X: return 'X';
        case Basis::Y: return 'Y';
    }
    throw std::invalid_argument("basis_char: bad basis");
}

Basis parse_basis(char c) {
    switch (c) {
        case 'Z': case 'z': return Basis::Z;
        case 'X': case 'x': return Basis::X;
        case 'Y': case 'y': return Basis::Y;
    }
    throw std::invalid_argument(std::string("parse_basis: unknown basis '") + c + "'");
}

BasisPair BasisPair::parse(const std::string& label) {
    if (label.size() != 2)
        throw std::invalid_argument("BasisPair: label must be two characters, got '" +
                                    label + "'");
    return {parse_basis(label[0]), parse_basis(label[1])};
}

std::vector<BasisPair> all_basis_pairs() {
    std::vector<BasisPair> out;
    for (Basis a : {Basis::Z, Basis::X, Basis::Y})
        for (Basis b : {Basis::Z, Basis::X, Basis::Y}) out.push_back({a, b});
    return out;
}

bool SingleBasisCounts::consistent() const {
    if (A0 < 0 || A1 < 0 || B0 < 0 || B1 < 0 || c00 < 0 || c01 < 0 || c10 < 0 ||
        c11 < 0)
        return false;
    return c00 + c01 <= A0 && c10 + c11 <= A1 && c00 + c10 <= B0 && c01 + c11 <= B1;
}

void SingleBasisCounts::validate() const {
    for (long long c : {A0, A1, B0, B1, c00, c01, c10, c11})
        if (c < 0) throw std::invalid_argument("SingleBasisCounts: negative count");
    auto require = [](bool ok, const char* relation) {
        if (!ok)
            throw std::invalid_argument(
                std::string("SingleBasisCounts: coincidences exceed singles (") +
                relation + ")");
    };
    require(c00 + c01 <= A0, "c00+c01 <= A0");
    require(c10 + c11 <= A1, "c10+c11 <= A1");
    require(c00 + c10 <= B0, "c00+c10 <= B0");
    require(c01 + c11 <= B1, "c01+c11 <= B1");
}

void PathwayEfficiencies::validate() const {
    for (double e : {a0, a1, b0, b1})
        if (!(e >= 0.0 && e <= 1.0))
            throw std::invalid_argument("PathwayEfficiencies: value outside [0, 1]");
}

void TomographyDataset::validate(bool strict) const {
    std::set<std::string> seen;
    for (const auto& rec : records) {
        const std::string label = rec.basis.label();
        if (!seen.insert(label).second)
            throw std::invalid_argument("TomographyDataset: duplicate basis " + label);
        if (strict) {
            try {
                rec.counts.validate();
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument("basis " + label + ": " + e.what());
            }
            if (rec.pair_count && *rec.pair_count < rec.counts.s() - rec.counts.n())
                throw std::invalid_argument("basis " + label +
                                            ": known N below s - n");
        }
    }
}

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

ordered counts_to_json(const SingleBasisCounts& c) {
    return ordered{{"A0", c.A0}, {"A1", c.A1}, {"B0", c.B0}, {"B1", c.B1},
                   {"c00", c.c00}, {"c01", c.c01}, {"c10", c.c10}, {"c11", c.c11}};
}

SingleBasisCounts counts_from_json(const json& j) {
    SingleBasisCounts c;
    c.A0 = j.at("A0").get<long long>();
    c.A1 = j.at("A1").get<long long>();
    c.B0 = j.at("B0").get<long long>();
    c.B1 = j.at("B1").get<long long>();
    c.c00 = j.at("c00").get<long long>();
    c.c01 = j.at("c01").get<long long>();
    c.c10 = j.at("c10").get<long long>();
    c.c11 = j.at("c11").get<long long>();
    return c;
}

}  // namespace

std::string dataset_to_json(const TomographyDataset& ds) {
    ordered root;
    root["efficiency_mode"] =
        ds.efficiency_mode == EfficiencyMode::Shared ? "shared" : "per_basis";
    root["bases"] = ordered::array();
    for (const auto& rec : ds.records) {
        ordered r;
        r["alice"] = std::string(1, basis_char(rec.basis.alice));
        r["bob"] = std::string(1, basis_char(rec.basis.bob));
        ordered counts = counts_to_json(rec.counts);
        for (auto& [key, value] : counts.items()) r[key] = value;
        if (rec.pair_count) r["N"] = *rec.pair_count;
        root["bases"].push_back(std::move(r));
    }
    if (ds.dark) root["dark"] = counts_to_json(*ds.dark);
    return root.dump(2) + "\n";
}

TomographyDataset dataset_from_json(const std::string& text) {
    const json root = json::parse(text);
    TomographyDataset ds;
    const std::string mode = root.at("efficiency_mode").get<std::string>();
    if (mode == "shared")
        ds.efficiency_mode = EfficiencyMode::Shared;
    else if (mode == "per_basis")
        ds.efficiency_mode = EfficiencyMode::PerBasis;
    else
        throw std::invalid_argument("dataset: unknown efficiency_mode '" + mode + "'");
    for (const auto& r : root.at("bases")) {
        BasisRecord rec;
        rec.basis.alice = parse_basis(r.at("alice").get<std::string>().at(0));
        rec.basis.bob = parse_basis(r.at("bob").get<std::string>().at(0));
        rec.counts = counts_from_json(r);
        if (r.contains("N")) rec.pair_count = r.at("N").get<long long>();
        ds.records.push_back(std::move(rec));
    }
    if (root.contains("dark")) ds.dark = counts_from_json(root.at("dark"));
    return ds;
}

TomographyDataset dataset_from_csv(const std::string& text, EfficiencyMode mode) {
    TomographyDataset ds;
    ds.efficiency_mode = mode;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.empty()) continue;
        // strip surrounding whitespace
        for (auto& f : fields) {
            const auto b = f.find_first_not_of(" \t");
            const auto e = f.find_last_not_of(" \t");
            f = b == std::string::npos ? "" : f.substr(b, e - b + 1);
        }
        if (fields[0] == "Basis" || fields[0] == "basis") continue;  // header
        if (fields.size() != 9)
            throw std::invalid_argument("dataset CSV line " + std::to_string(line_no) +
                                        ": expected 9 fields, got " +
                                        std::to_string(fields.size()));
        SingleBasisCounts c;
        try {
            c.A0 = std::stoll(fields[1]);
            c.A1 = std::stoll(fields[2]);
            c.B0 = std::stoll(fields[3]);
            c.B1 = std::stoll(fields[4]);
            c.c00 = std::stoll(fields[5]);
            c.c01 = std::stoll(fields[6]);
            c.c10 = std::stoll(fields[7]);
            c.c11 = std::stoll(fields[8]);
        } catch (const std::exception&) {
            throw std::invalid_argument("dataset CSV line " + std::to_string(line_no) +
                                        ": non-integer count");
        }
        if (fields[0] == "Dark" || fields[0] == "dark") {
            ds.dark = c;
        } else {
            ds.records.push_back({BasisPair::parse(fields[0]), c, std::nullopt});
        }
    }
    return ds;
}

TomographyDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
        return dataset_from_csv(text);
    return dataset_from_json(text);
}

void save_dataset(const TomographyDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    out << dataset_to_json(ds);
}

}  // namespace qtomo
