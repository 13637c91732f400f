#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "floorlab/money.hpp"
#include "floorlab/panel.hpp"

namespace floorlab {

enum class PolicyFamily {
    baseline,
    uniform_pct,
    absolute_add,
    min_positive,
    min_all,
    margin_add,
    hybrid_min_margin,
};

const char* family_name(PolicyFamily family);

enum class QuantileKey { q25, q50, q75 };

const char* quantile_key_name(QuantileKey key);
Money quantile_value(const QuantileSet& set, QuantileKey key);

/// One deterministic floor rule. Only the parameters relevant to the family
/// are read.
struct PolicySpec {
    int id = 0;  // P<id>
    PolicyFamily family = PolicyFamily::baseline;
    std::int32_t pct = 0;       // uniform_pct
    Money add = 0;              // absolute_add, margin_add
    QuantileKey quantile = QuantileKey::q50;  // min_*, hybrid
    Money gap = 0;              // margin_add, hybrid: required bid - logged floor
    std::string display_name;

    std::string label() const { return "P" + std::to_string(id); }

    bool operator==(const PolicySpec&) const = default;
};

/// The 19-policy catalog with the quantiles it was frozen against.
struct PolicyCatalog {
    std::vector<PolicySpec> specs;
    QuantileSet quantiles_positive;
    QuantileSet quantiles_all;

    const PolicySpec& by_id(int id) const;
    bool contains(int id) const;

    /// FNV-1a over the serialized specs and quantiles; equal hashes mean the
    /// same frozen definitions.
    std::uint64_t hash() const;
};

/// P0..P18. Positive-floor minimums and both hybrids read the positive-floor
/// quantiles; the all-floor minimums read the all-floor quantiles.
PolicyCatalog build_catalog(const QuantileSet& qpos, const QuantileSet& qall);

/// Throws ConfigError if the spec's parameters fall outside the documented
/// catalog ranges.
void validate_spec(const PolicySpec& spec);

/// Candidate floor for one row. Pure. Percentage raises round half up.
Money apply_policy(const PolicySpec& spec, const AuctionRecord& record, const PolicyCatalog& catalog);

/// Same rule evaluated on raw columns (the replay hot loop).
Money apply_policy(const PolicySpec& spec, Money logged_floor, Money bid, const PolicyCatalog& catalog);

/// True iff the candidate floor is >= the logged floor on every row.
bool verify_non_decreasing(const PolicySpec& spec, const Panel& panel, const PolicyCatalog& catalog);

/// Candidate floors for every row of the panel.
std::vector<Money> candidate_floors(const PolicySpec& spec, const Panel& panel, const PolicyCatalog& catalog);

}  // namespace floorlab
