#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "floorlab/money.hpp"
#include "floorlab/panel.hpp"
#include "floorlab/policy.hpp"

namespace floorlab {

struct DailyReplay {
    std::int32_t day = 0;
    std::int64_t opportunities = 0;
    MoneySum value_sum = 0;
    MoneySum baseline_value_sum = 0;
    std::int64_t baseline_filled = 0;
    std::int64_t retained = 0;
    std::optional<double> lift;  // nullopt when the day's baseline value is zero
    double retained_share = 1.0;

    bool operator==(const DailyReplay&) const = default;
};

/// Replay of one policy over one panel. Counts and sums are exact; ratios are
/// computed once from them. Shares with a zero baseline are 1.0 and flagged.
struct ReplayResult {
    int policy_id = 0;
    std::string display_name;
    std::uint64_t catalog_hash = 0;

    std::int64_t opportunities = 0;
    MoneySum value_sum = 0;           // sum D * 1{b >= f} * max(p, f)
    MoneySum baseline_value_sum = 0;  // same under the logged floors
    double value_per_opportunity = 0.0;
    double baseline_value_per_opportunity = 0.0;
    double lift = 0.0;

    std::int64_t baseline_filled = 0, retained_impressions = 0;
    std::int64_t baseline_clicks = 0, retained_clicks = 0;
    std::int64_t baseline_conversions = 0, retained_conversions = 0;
    std::int64_t baseline_value_proxy = 0, retained_value_proxy = 0;
    double impression_share = 1.0, click_share = 1.0, conversion_share = 1.0, value_proxy_share = 1.0;
    bool conversions_vacuous = false;  // zero baseline conversions
    bool clicks_vacuous = false;

    std::int64_t changed = 0;  // rows with candidate floor > logged floor
    double changed_share = 0.0;

    std::vector<DailyReplay> daily;

    bool operator==(const ReplayResult&) const = default;
};

struct ReplayOptions {
    std::size_t shards = 0;   // 0: use the panel's shard count
    std::size_t threads = 1;
};

/// Throws ContractError if the policy lowers any floor and UndefinedLiftError
/// if the baseline value is zero.
ReplayResult replay_policy(const Panel& panel, const PolicySpec& spec, const PolicyCatalog& catalog,
                           ReplayOptions options = {});

/// Every catalog policy, in catalog order.
std::vector<ReplayResult> replay_all(const Panel& panel, const PolicyCatalog& catalog,
                                     ReplayOptions options = {});

const ReplayResult& find_result(std::span<const ReplayResult> results, int policy_id);

struct FrontierRow {
    int policy_id = 0;
    std::string display_name;
    double changed_share = 0.0;
    double lift = 0.0;
    int guardrails_passed = 0;
};

/// One row per policy, lift descending; ties by smaller changed share, then id.
/// guardrails_passed is parallel to results (empty: all zero).
std::vector<FrontierRow> replay_frontier(std::span<const ReplayResult> results,
                                         std::span<const int> guardrails_passed = {});

/// Dense lift ranks (1 = best), parallel to results. Equal replay values
/// share the better rank.
std::vector<int> lift_ranks(std::span<const ReplayResult> results);

struct DailyStability {
    double min_daily_lift = 0.0;
    double max_daily_lift = 0.0;
    double median_daily_lift = 0.0;
    int days_positive = 0;
    int days_total = 0;      // days with a defined lift
    int days_undefined = 0;  // zero-baseline days, excluded from the counts
};

DailyStability daily_stability(const ReplayResult& result);

}  // namespace floorlab
