#include "floorlab/policy.hpp"

#include <algorithm>
#include <array>

#include "floorlab/error.hpp"
#include "floorlab/io.hpp"

namespace floorlab {

const char* family_name(PolicyFamily family) {
    switch (family) {
        case PolicyFamily::baseline: return "baseline";
        case PolicyFamily::uniform_pct: return "uniform_pct";
        case PolicyFamily::absolute_add: return "absolute_add";
        case PolicyFamily::min_positive: return "min_positive";
        case PolicyFamily::min_all: return "min_all";
        case PolicyFamily::margin_add: return "margin_add";
        case PolicyFamily::hybrid_min_margin: return "hybrid_min_margin";
    }
    return "?";
}

const char* quantile_key_name(QuantileKey key) {
    switch (key) {
        case QuantileKey::q25: return "q25";
        case QuantileKey::q50: return "q50";
        case QuantileKey::q75: return "q75";
    }
    return "?";
}

Money quantile_value(const QuantileSet& set, QuantileKey key) {
    switch (key) {
        case QuantileKey::q25: return set.q25;
        case QuantileKey::q50: return set.q50;
        case QuantileKey::q75: return set.q75;
    }
    return set.q50;
}

const PolicySpec& PolicyCatalog::by_id(int id) const {
    auto it = std::find_if(specs.begin(), specs.end(), [id](const PolicySpec& s) { return s.id == id; });
    if (it == specs.end()) throw ConfigError("unknown policy P" + std::to_string(id));
    return *it;
}

bool PolicyCatalog::contains(int id) const {
    return std::any_of(specs.begin(), specs.end(), [id](const PolicySpec& s) { return s.id == id; });
}

std::uint64_t PolicyCatalog::hash() const {
    std::string text;
    for (const auto& s : specs) {
        text += s.label() + '|' + family_name(s.family) + '|' + std::to_string(s.pct) + '|' +
                std::to_string(s.add) + '|' + quantile_key_name(s.quantile) + '|' +
                std::to_string(s.gap) + '|' + s.display_name + '\n';
    }
    for (const auto* q : {&quantiles_positive, &quantiles_all}) {
        text += std::string(population_name(q->population)) + ':' + std::to_string(q->q25) + ',' +
                std::to_string(q->q50) + ',' + std::to_string(q->q75) + '\n';
    }
    return io::fnv1a(text);
}

PolicyCatalog build_catalog(const QuantileSet& qpos, const QuantileSet& qall) {
    using F = PolicyFamily;
    using Q = QuantileKey;
    PolicyCatalog c;
    c.quantiles_positive = qpos;
    c.quantiles_all = qall;
    c.specs = {
        {0, F::baseline, 0, 0, Q::q50, 0, "Logged status quo"},
        {1, F::uniform_pct, 5, 0, Q::q50, 0, "Uniform +5%"},
        {2, F::uniform_pct, 10, 0, Q::q50, 0, "Uniform +10%"},
        {3, F::uniform_pct, 15, 0, Q::q50, 0, "Uniform +15%"},
        {4, F::uniform_pct, 20, 0, Q::q50, 0, "Uniform +20%"},
        {5, F::uniform_pct, 30, 0, Q::q50, 0, "Uniform +30%"},
        {6, F::absolute_add, 0, 5, Q::q50, 0, "Add 5 to all floors"},
        {7, F::absolute_add, 0, 10, Q::q50, 0, "Add 10 to all floors"},
        {8, F::absolute_add, 0, 20, Q::q50, 0, "Add 20 to all floors"},
        {9, F::min_positive, 0, 0, Q::q25, 0, "Positive-floor q25 minimum"},
        {10, F::min_positive, 0, 0, Q::q50, 0, "Positive-floor q50 minimum"},
        {11, F::min_positive, 0, 0, Q::q75, 0, "Positive-floor q75 minimum"},
        {12, F::min_all, 0, 0, Q::q25, 0, "All-floor q25 minimum"},
        {13, F::min_all, 0, 0, Q::q50, 0, "All-floor q50 minimum"},
        {14, F::margin_add, 0, 5, Q::q50, 25, "Gap-25 add 5"},
        {15, F::margin_add, 0, 10, Q::q50, 50, "Gap-50 add 10"},
        {16, F::margin_add, 0, 20, Q::q50, 100, "Gap-100 add 20"},
        {17, F::hybrid_min_margin, 0, 0, Q::q50, 50, "Q50 Margin-Gated Floor"},
        {18, F::hybrid_min_margin, 0, 0, Q::q75, 100, "Q75 Margin-Gated Floor"},
    };
    return c;
}

void validate_spec(const PolicySpec& s) {
    auto in = [](auto v, std::initializer_list<decltype(v)> allowed) {
        return std::find(allowed.begin(), allowed.end(), v) != allowed.end();
    };
    switch (s.family) {
        case PolicyFamily::baseline:
        case PolicyFamily::min_positive:
        case PolicyFamily::min_all:
            return;
        case PolicyFamily::uniform_pct:
            if (!in(s.pct, {5, 10, 15, 20, 30})) throw ConfigError(s.label() + ": pct outside {5,10,15,20,30}");
            return;
        case PolicyFamily::absolute_add:
            if (!in(s.add, {Money{5}, Money{10}, Money{20}})) throw ConfigError(s.label() + ": add outside {5,10,20}");
            return;
        case PolicyFamily::margin_add:
            if (!in(s.add, {Money{5}, Money{10}, Money{20}})) throw ConfigError(s.label() + ": add outside {5,10,20}");
            [[fallthrough]];
        case PolicyFamily::hybrid_min_margin:
            if (!in(s.gap, {Money{25}, Money{50}, Money{100}})) throw ConfigError(s.label() + ": gap outside {25,50,100}");
            return;
    }
}

Money apply_policy(const PolicySpec& s, Money f0, Money bid, const PolicyCatalog& catalog) {
    switch (s.family) {
        case PolicyFamily::baseline:
            return f0;
        case PolicyFamily::uniform_pct:
            // Half-up: floor((f0 * (100 + pct) + 50) / 100) for f0 >= 0.
            return (f0 * (100 + s.pct) + 50) / 100;
        case PolicyFamily::absolute_add:
            return f0 + s.add;
        case PolicyFamily::min_positive:
            return f0 > 0 ? std::max(f0, quantile_value(catalog.quantiles_positive, s.quantile)) : f0;
        case PolicyFamily::min_all:
            return std::max(f0, quantile_value(catalog.quantiles_all, s.quantile));
        case PolicyFamily::margin_add:
            return bid - f0 >= s.gap ? f0 + s.add : f0;
        case PolicyFamily::hybrid_min_margin:
            return bid - f0 >= s.gap ? std::max(f0, quantile_value(catalog.quantiles_positive, s.quantile)) : f0;
    }
    return f0;
}

Money apply_policy(const PolicySpec& spec, const AuctionRecord& r, const PolicyCatalog& catalog) {
    return apply_policy(spec, r.logged_floor, r.bid, catalog);
}

bool verify_non_decreasing(const PolicySpec& spec, const Panel& panel, const PolicyCatalog& catalog) {
    const auto floors = panel.floors();
    const auto bids = panel.bids();
    for (std::size_t i = 0; i < panel.size(); ++i)
        if (apply_policy(spec, floors[i], bids[i], catalog) < floors[i]) return false;
    return true;
}

std::vector<Money> candidate_floors(const PolicySpec& spec, const Panel& panel, const PolicyCatalog& catalog) {
    std::vector<Money> out(panel.size());
    const auto floors = panel.floors();
    const auto bids = panel.bids();
    for (std::size_t i = 0; i < panel.size(); ++i) out[i] = apply_policy(spec, floors[i], bids[i], catalog);
    return out;
}

}  // namespace floorlab
