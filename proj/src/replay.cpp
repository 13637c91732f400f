#include "floorlab/replay.hpp"

#include <algorithm>
#include <numeric>
#include <thread>

#include "floorlab/error.hpp"
#include "floorlab/guardrails.hpp"
#include "floorlab/stats.hpp"

namespace floorlab {

namespace {

struct DayTally {
    std::int64_t opportunities = 0;
    MoneySum value = 0, baseline_value = 0;
    std::int64_t baseline_filled = 0, retained = 0;

    DayTally& operator+=(const DayTally& o) {
        opportunities += o.opportunities;
        value += o.value;
        baseline_value += o.baseline_value;
        baseline_filled += o.baseline_filled;
        retained += o.retained;
        return *this;
    }
};

// Partial sums for one shard. Merging is integer addition, so the result is
// independent of shard count and merge order.
struct Tally {
    MoneySum value = 0, baseline_value = 0;
    std::int64_t baseline_filled = 0, retained = 0;
    std::int64_t baseline_clicks = 0, retained_clicks = 0;
    std::int64_t baseline_conversions = 0, retained_conversions = 0;
    std::int64_t changed = 0;
    std::vector<DayTally> days;

    explicit Tally(std::size_t n_days) : days(n_days) {}

    Tally& operator+=(const Tally& o) {
        value += o.value;
        baseline_value += o.baseline_value;
        baseline_filled += o.baseline_filled;
        retained += o.retained;
        baseline_clicks += o.baseline_clicks;
        retained_clicks += o.retained_clicks;
        baseline_conversions += o.baseline_conversions;
        retained_conversions += o.retained_conversions;
        changed += o.changed;
        for (std::size_t d = 0; d < days.size(); ++d) days[d] += o.days[d];
        return *this;
    }
};

Tally tally_range(const Panel& panel, const PolicySpec& spec, const PolicyCatalog& catalog,
                  std::size_t begin, std::size_t end) {
    Tally t(panel.day_keys().size());
    const auto floors = panel.floors();
    const auto bids = panel.bids();
    const auto pays = panel.pays();
    const auto filled = panel.filled();
    const auto clicked = panel.clicked();
    const auto converted = panel.converted();
    const auto day_index = panel.day_index();
    for (std::size_t i = begin; i < end; ++i) {
        const Money f0 = floors[i];
        const Money f = apply_policy(spec, f0, bids[i], catalog);
        auto& day = t.days[static_cast<std::size_t>(day_index[i])];
        day.opportunities += 1;
        if (f > f0) t.changed += 1;
        if (!filled[i]) continue;
        const Money p = pays[i];
        const Money base = std::max(p, f0);
        t.baseline_value += base;
        t.baseline_filled += 1;
        t.baseline_clicks += clicked[i];
        t.baseline_conversions += converted[i];
        day.baseline_value += base;
        day.baseline_filled += 1;
        if (bids[i] >= f) {
            const Money v = std::max(p, f);
            t.value += v;
            t.retained += 1;
            t.retained_clicks += clicked[i];
            t.retained_conversions += converted[i];
            day.value += v;
            day.retained += 1;
        }
    }
    return t;
}

double share(std::int64_t kept, std::int64_t base) {
    return base == 0 ? 1.0 : static_cast<double>(kept) / static_cast<double>(base);
}

}  // namespace

ReplayResult replay_policy(const Panel& panel, const PolicySpec& spec, const PolicyCatalog& catalog,
                           ReplayOptions options) {
    if (!verify_non_decreasing(spec, panel, catalog))
        throw ContractError(spec.label() + " lowers a logged floor; replay requires non-decreasing policies");

    const std::size_t shards = options.shards == 0 ? panel.shard_count() : options.shards;
    const auto ranges = panel.shard_ranges(shards);
    std::vector<Tally> partial(ranges.size(), Tally(panel.day_keys().size()));
    const std::size_t n_threads = std::clamp<std::size_t>(options.threads, 1, ranges.size());
    if (n_threads == 1) {
        for (std::size_t s = 0; s < ranges.size(); ++s)
            partial[s] = tally_range(panel, spec, catalog, ranges[s].first, ranges[s].second);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t s = t; s < ranges.size(); s += n_threads)
                    partial[s] = tally_range(panel, spec, catalog, ranges[s].first, ranges[s].second);
            });
        }
    }
    Tally total(panel.day_keys().size());
    for (const auto& p : partial) total += p;

    if (total.baseline_value == 0)
        throw UndefinedLiftError("baseline replay value is zero; lift is undefined");

    ReplayResult r;
    r.policy_id = spec.id;
    r.display_name = spec.display_name;
    r.catalog_hash = catalog.hash();
    r.opportunities = static_cast<std::int64_t>(panel.size());
    r.value_sum = total.value;
    r.baseline_value_sum = total.baseline_value;
    r.value_per_opportunity = exact_ratio(total.value, r.opportunities);
    r.baseline_value_per_opportunity = exact_ratio(total.baseline_value, r.opportunities);
    r.lift = exact_ratio(total.value - total.baseline_value, total.baseline_value);

    r.baseline_filled = total.baseline_filled;
    r.retained_impressions = total.retained;
    r.baseline_clicks = total.baseline_clicks;
    r.retained_clicks = total.retained_clicks;
    r.baseline_conversions = total.baseline_conversions;
    r.retained_conversions = total.retained_conversions;
    r.baseline_value_proxy = value_proxy(total.baseline_clicks, total.baseline_conversions);
    r.retained_value_proxy = value_proxy(total.retained_clicks, total.retained_conversions);
    r.impression_share = share(r.retained_impressions, r.baseline_filled);
    r.click_share = share(r.retained_clicks, r.baseline_clicks);
    r.conversion_share = share(r.retained_conversions, r.baseline_conversions);
    r.value_proxy_share = share(r.retained_value_proxy, r.baseline_value_proxy);
    r.clicks_vacuous = r.baseline_clicks == 0;
    r.conversions_vacuous = r.baseline_conversions == 0;
    r.changed = total.changed;
    r.changed_share = share(total.changed, r.opportunities);

    const auto keys = panel.day_keys();
    r.daily.reserve(keys.size());
    for (std::size_t d = 0; d < keys.size(); ++d) {
        const auto& t = total.days[d];
        DailyReplay day;
        day.day = keys[d];
        day.opportunities = t.opportunities;
        day.value_sum = t.value;
        day.baseline_value_sum = t.baseline_value;
        day.baseline_filled = t.baseline_filled;
        day.retained = t.retained;
        if (t.baseline_value != 0) day.lift = exact_ratio(t.value - t.baseline_value, t.baseline_value);
        day.retained_share = share(t.retained, t.baseline_filled);
        r.daily.push_back(day);
    }
    return r;
}

std::vector<ReplayResult> replay_all(const Panel& panel, const PolicyCatalog& catalog, ReplayOptions options) {
    std::vector<ReplayResult> out;
    out.reserve(catalog.specs.size());
    for (const auto& spec : catalog.specs) out.push_back(replay_policy(panel, spec, catalog, options));
    return out;
}

const ReplayResult& find_result(std::span<const ReplayResult> results, int policy_id) {
    for (const auto& r : results)
        if (r.policy_id == policy_id) return r;
    throw ContractError("no replay result for P" + std::to_string(policy_id));
}

std::vector<FrontierRow> replay_frontier(std::span<const ReplayResult> results,
                                         std::span<const int> guardrails_passed) {
    if (std::none_of(results.begin(), results.end(), [](const ReplayResult& r) { return r.policy_id == 0; }))
        throw ContractError("frontier requires the baseline policy P0");
    std::vector<FrontierRow> rows;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        rows.push_back({r.policy_id, r.display_name, r.changed_share, r.lift,
                        guardrails_passed.empty() ? 0 : guardrails_passed[i]});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const FrontierRow& a, const FrontierRow& b) {
        if (a.lift != b.lift) return a.lift > b.lift;
        if (a.changed_share != b.changed_share) return a.changed_share < b.changed_share;
        return a.policy_id < b.policy_id;
    });
    return rows;
}

std::vector<int> lift_ranks(std::span<const ReplayResult> results) {
    std::vector<MoneySum> values;
    for (const auto& r : results) values.push_back(r.value_sum);
    std::vector<MoneySum> distinct = values;
    std::sort(distinct.begin(), distinct.end(), std::greater<>());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<int> ranks;
    for (MoneySum v : values) {
        const auto pos = std::find(distinct.begin(), distinct.end(), v) - distinct.begin();
        ranks.push_back(static_cast<int>(pos) + 1);
    }
    return ranks;
}

DailyStability daily_stability(const ReplayResult& result) {
    if (result.daily.empty()) throw DomainError("daily breakdown is empty");
    DailyStability s;
    std::vector<double> lifts;
    for (const auto& d : result.daily) {
        if (!d.lift) {
            ++s.days_undefined;
            continue;
        }
        lifts.push_back(*d.lift);
        if (*d.lift > 0.0) ++s.days_positive;
    }
    s.days_total = static_cast<int>(lifts.size());
    if (!lifts.empty()) {
        s.min_daily_lift = *std::min_element(lifts.begin(), lifts.end());
        s.max_daily_lift = *std::max_element(lifts.begin(), lifts.end());
        s.median_daily_lift = nearest_rank(lifts, 0.5);
    }
    return s;
}

}  // namespace floorlab
