#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "floorlab/money.hpp"
#include "floorlab/panel.hpp"

namespace floorlab {

/// Synthetic panel generator parameters. Bids and positive floors are
/// log-normal; a bid fills iff it clears the logged floor and an independent
/// demand coin lands heads.
struct GenConfig {
    std::size_t n_rows = 100'000;
    std::int32_t n_days = 7;
    std::int32_t first_day = 20130606;
    std::string window_id = "synthetic";

    double bid_log_mean = 5.4;  // median bid ~ 221
    double bid_log_sd = 0.7;
    std::vector<double> bid_log_shift_by_region;  // optional, indexed by region - 1

    double zero_floor_prob = 0.5;
    double floor_log_mean = 4.1;  // median positive floor ~ 60
    double floor_log_sd = 0.4;

    double demand_prob = 0.25;                    // phi
    std::vector<double> demand_prob_by_exchange;  // optional, indexed by exchange - 1

    // Payment = floor + (bid - floor) * k / 100, k uniform in [lo, hi].
    std::int32_t pay_share_lo_pct = 2;
    std::int32_t pay_share_hi_pct = 15;

    double click_rate = 0.0008;
    double conversion_rate = 0.00004;

    std::int32_t n_exchanges = 3;
    std::int32_t n_regions = 12;
    std::int32_t n_advertisers = 9;
    std::int32_t n_slots = 4;
    std::int32_t n_devices = 3;

    std::uint64_t seed = 1;

    /// Throws ConfigError for out-of-range parameters.
    void validate() const;
};

/// Deterministic for a fixed config. Rows come out sorted by (day, timestamp)
/// and satisfy every AuctionRecord invariant.
Panel generate_panel(const GenConfig& config);

/// Straight-line replay of an explicit per-row floor vector. Trusted oracle
/// for the sharded replay engine: no sharding, no policy code, exact sums.
struct OracleReplay {
    MoneySum value_sum = 0;
    std::int64_t opportunities = 0;
    std::int64_t retained = 0;
    std::int64_t retained_clicks = 0;
    std::int64_t retained_conversions = 0;

    double value_per_opportunity() const {
        return opportunities == 0 ? 0.0 : exact_ratio(value_sum, opportunities);
    }
};

/// Throws ContractError when sizes differ or any floor is below the logged one.
OracleReplay oracle_replay_value(const Panel& panel, std::span<const Money> floors);

}  // namespace floorlab
