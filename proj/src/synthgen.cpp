#include "floorlab/synthgen.hpp"

#include <cmath>
#include <numbers>

#include "floorlab/error.hpp"
#include "floorlab/rng.hpp"

namespace floorlab {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

// Counter slots per row; each row owns [16 i, 16 i + 16).
enum Slot : std::uint64_t {
    kExchange, kRegion, kAdvertiser, kSlot, kDevice,
    kBidU1, kBidU2, kZeroFloor, kFloorU1, kFloorU2,
    kDemand, kPayShare, kClick, kConversion
};

double gaussian(const CounterRng& rng, std::uint64_t c1, std::uint64_t c2) {
    const double u1 = rng.uniform(c1);
    const double u2 = rng.uniform(c2);
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

void GenConfig::validate() const {
    if (n_rows < 1) throw ConfigError("n_rows must be >= 1");
    if (n_days < 1) throw ConfigError("n_days must be >= 1");
    if (!(bid_log_sd >= 0.0) || !(floor_log_sd >= 0.0)) throw ConfigError("log-normal sd must be >= 0");
    if (!std::isfinite(bid_log_mean) || !std::isfinite(floor_log_mean))
        throw ConfigError("log-normal mean must be finite");
    for (double s : bid_log_shift_by_region)
        if (!std::isfinite(s)) throw ConfigError("bid shift must be finite");
    for (double p : {zero_floor_prob, demand_prob, click_rate, conversion_rate})
        if (!is_probability(p)) throw ConfigError("probabilities must lie in [0,1]");
    for (double p : demand_prob_by_exchange)
        if (!is_probability(p)) throw ConfigError("probabilities must lie in [0,1]");
    if (!demand_prob_by_exchange.empty() &&
        demand_prob_by_exchange.size() != static_cast<std::size_t>(n_exchanges))
        throw ConfigError("demand_prob_by_exchange needs one entry per exchange");
    if (!bid_log_shift_by_region.empty() &&
        bid_log_shift_by_region.size() != static_cast<std::size_t>(n_regions))
        throw ConfigError("bid_log_shift_by_region needs one entry per region");
    if (pay_share_lo_pct < 0 || pay_share_hi_pct > 100 || pay_share_lo_pct > pay_share_hi_pct)
        throw ConfigError("pay share range must satisfy 0 <= lo <= hi <= 100");
    for (auto n : {n_exchanges, n_regions, n_advertisers, n_slots, n_devices})
        if (n < 1) throw ConfigError("category counts must be >= 1");
}

Panel generate_panel(const GenConfig& cfg) {
    cfg.validate();
    const CounterRng rng(cfg.seed, streams::kGenerator);
    constexpr std::int64_t kDayMs = 86'400'000;
    const auto n = static_cast<std::int64_t>(cfg.n_rows);

    std::vector<AuctionRecord> rows;
    rows.reserve(cfg.n_rows);
    for (std::int64_t i = 0; i < n; ++i) {
        const std::uint64_t c = static_cast<std::uint64_t>(i) * 16;
        AuctionRecord r;
        r.timestamp = static_cast<std::int64_t>(static_cast<__int128>(i) * kDayMs * cfg.n_days / n);
        r.day = cfg.first_day + static_cast<std::int32_t>(r.timestamp / kDayMs);
        r.hour = static_cast<std::int32_t>((r.timestamp / 3'600'000) % 24);
        r.exchange = 1 + static_cast<std::int32_t>(rng.below(c + kExchange, static_cast<std::uint64_t>(cfg.n_exchanges)));
        r.region = 1 + static_cast<std::int32_t>(rng.below(c + kRegion, static_cast<std::uint64_t>(cfg.n_regions)));
        r.advertiser = 1 + static_cast<std::int32_t>(rng.below(c + kAdvertiser, static_cast<std::uint64_t>(cfg.n_advertisers)));
        r.slot = 1 + static_cast<std::int32_t>(rng.below(c + kSlot, static_cast<std::uint64_t>(cfg.n_slots)));
        r.device = 1 + static_cast<std::int32_t>(rng.below(c + kDevice, static_cast<std::uint64_t>(cfg.n_devices)));

        double bid_mu = cfg.bid_log_mean;
        if (!cfg.bid_log_shift_by_region.empty())
            bid_mu += cfg.bid_log_shift_by_region[static_cast<std::size_t>(r.region - 1)];
        r.bid = std::max<Money>(1, std::llround(std::exp(bid_mu + cfg.bid_log_sd * gaussian(rng, c + kBidU1, c + kBidU2))));

        if (rng.uniform(c + kZeroFloor) < cfg.zero_floor_prob) {
            r.logged_floor = 0;
        } else {
            r.logged_floor = std::max<Money>(
                1, std::llround(std::exp(cfg.floor_log_mean +
                                         cfg.floor_log_sd * gaussian(rng, c + kFloorU1, c + kFloorU2))));
        }

        const double phi = cfg.demand_prob_by_exchange.empty()
                               ? cfg.demand_prob
                               : cfg.demand_prob_by_exchange[static_cast<std::size_t>(r.exchange - 1)];
        const bool demand = rng.uniform(c + kDemand) < phi;
        r.filled = demand && r.bid >= r.logged_floor;
        if (r.filled) {
            const auto span = static_cast<std::uint64_t>(cfg.pay_share_hi_pct - cfg.pay_share_lo_pct + 1);
            const Money share = cfg.pay_share_lo_pct + static_cast<Money>(rng.below(c + kPayShare, span));
            r.pay_price = r.logged_floor + (r.bid - r.logged_floor) * share / 100;
            r.clicked = rng.uniform(c + kClick) < cfg.click_rate;
            r.converted = rng.uniform(c + kConversion) < cfg.conversion_rate;
        }
        rows.push_back(r);
    }
    return Panel::from_records(std::move(rows), cfg.window_id);
}

OracleReplay oracle_replay_value(const Panel& panel, std::span<const Money> floors) {
    if (floors.size() != panel.size())
        throw ContractError("floor vector length differs from panel length");
    OracleReplay out;
    out.opportunities = static_cast<std::int64_t>(panel.size());
    for (std::size_t i = 0; i < panel.size(); ++i) {
        const AuctionRecord r = panel.record(i);
        const Money f = floors[i];
        if (f < r.logged_floor)
            throw ContractError("candidate floor below logged floor at row " + std::to_string(i));
        if (r.filled && r.bid >= f) {
            out.value_sum += r.pay_price > f ? r.pay_price : f;
            out.retained += 1;
            out.retained_clicks += r.clicked ? 1 : 0;
            out.retained_conversions += r.converted ? 1 : 0;
        }
    }
    return out;
}

}  // namespace floorlab
