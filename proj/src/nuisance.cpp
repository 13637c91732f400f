#include "floorlab/nuisance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "floorlab/error.hpp"
#include "floorlab/guardrails.hpp"
#include "floorlab/io.hpp"
#include "floorlab/rng.hpp"

namespace floorlab {

const char* context_key_name(ContextKey key) {
    switch (key) {
        case ContextKey::exchange: return "exchange";
        case ContextKey::region: return "region";
        case ContextKey::advertiser: return "advertiser";
        case ContextKey::day_of_week: return "day_of_week";
        case ContextKey::hour: return "hour";
        case ContextKey::slot: return "slot";
        case ContextKey::device: return "device";
    }
    return "?";
}

ContextKey parse_context_key(const std::string& name) {
    for (auto k : {ContextKey::exchange, ContextKey::region, ContextKey::advertiser, ContextKey::day_of_week,
                   ContextKey::hour, ContextKey::slot, ContextKey::device})
        if (name == context_key_name(k)) return k;
    throw ConfigError("unknown context key '" + name + "'");
}

int day_of_week(std::int32_t day_key) {
    using namespace std::chrono;
    const year_month_day ymd{year{day_key / 10000}, month{static_cast<unsigned>(day_key / 100 % 100)},
                             day{static_cast<unsigned>(day_key % 100)}};
    if (day_key <= 0 || !ymd.ok()) return static_cast<int>(((day_key % 7) + 7) % 7);
    return static_cast<int>(weekday{sys_days{ymd}}.c_encoding());
}

std::int64_t context_value(const Panel& panel, std::size_t i, ContextKey key) {
    switch (key) {
        case ContextKey::exchange: return panel.exchanges()[i];
        case ContextKey::region: return panel.regions()[i];
        case ContextKey::advertiser: return panel.advertisers()[i];
        case ContextKey::day_of_week: return day_of_week(panel.days()[i]);
        case ContextKey::hour: return panel.hours()[i];
        case ContextKey::slot: return panel.slots()[i];
        case ContextKey::device: return panel.devices()[i];
    }
    return 0;
}

std::uint64_t context_hash(const Panel& panel, std::size_t i, std::span<const ContextKey> features) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (ContextKey k : features) {
        const std::int64_t v = context_value(panel, i, k);
        h = io::fnv1a(std::string_view(reinterpret_cast<const char*>(&v), sizeof v), h);
    }
    return h;
}

void ModelConfig::validate() const {
    if (features.empty()) throw ConfigError("model feature list is empty");
    if (!(smoothing >= 0.0)) throw ConfigError("model smoothing must be >= 0");
}

void BinnedMeanModel::add(std::uint64_t key, double y) {
    auto& c = cells_[key];
    c.sum += y;
    c.count += 1;
    sum_ += y;
    count_ += 1;
}

double BinnedMeanModel::predict(std::uint64_t key) const {
    const double g = global_mean();
    const auto it = cells_.find(key);
    if (it == cells_.end()) return g;
    const auto& c = it->second;
    if (alpha_ == 0.0) return c.sum / static_cast<double>(c.count);
    return (c.sum + alpha_ * g) / (static_cast<double>(c.count) + alpha_);
}

// ---------------------------------------------------------------------------

void LoggerConfig::validate() const {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("logger.epsilon must be in (0, 1]");
    if (!(status_quo_tilt >= 0.0 && status_quo_tilt <= 1.0)) throw ConfigError("logger.status_quo_tilt must be in [0, 1]");
    if (!(min_propensity > 0.0 && min_propensity < 1.0)) throw ConfigError("logger.min_propensity must be in (0, 1)");
    if (floor_tolerance < 0) throw ConfigError("logger.floor_tolerance must be >= 0");
}

std::size_t LoggedActionPanel::action_index(int policy_id) const {
    for (std::size_t k = 0; k < shortlist.size(); ++k)
        if (shortlist[k].id == policy_id) return k;
    throw SupportError("P" + std::to_string(policy_id) + " is not in the logged action set");
}

Money replay_reward(const Panel& panel, std::size_t i, Money floor) {
    if (!panel.filled()[i] || panel.bids()[i] < floor) return 0;
    return std::max(panel.pays()[i], floor);
}

LoggedActionPanel simulate_logger(const Panel& panel, std::span<const PolicySpec> shortlist,
                                  const PolicyCatalog& catalog, const LoggerConfig& config, std::uint64_t seed) {
    config.validate();
    if (shortlist.empty()) throw ConfigError("logger shortlist is empty");
    if (shortlist.size() > 0xFFFF) throw ConfigError("logger shortlist too large");
    for (const auto& spec : shortlist)
        if (!verify_non_decreasing(spec, panel, catalog))
            throw ContractError(spec.label() + " lowers a logged floor; it cannot be a logged action");

    LoggedActionPanel out;
    out.panel = panel;
    out.catalog = catalog;
    out.shortlist.assign(shortlist.begin(), shortlist.end());
    out.floor_tolerance = config.floor_tolerance;

    const std::size_t k_count = shortlist.size();
    const double k = static_cast<double>(k_count);
    auto sq = std::find_if(shortlist.begin(), shortlist.end(),
                           [&](const PolicySpec& s) { return s.id == config.status_quo_policy; });
    const bool has_sq = sq != shortlist.end();
    out.status_quo_action = has_sq ? static_cast<std::size_t>(sq - shortlist.begin()) : 0;
    for (std::size_t a = 0; a < k_count; ++a) {
        double p;
        if (k_count == 1) p = 1.0;
        else if (has_sq)
            p = config.epsilon / k +
                (1.0 - config.epsilon) * ((a == out.status_quo_action ? config.status_quo_tilt : 0.0) +
                                          (1.0 - config.status_quo_tilt) / k);
        else p = 1.0 / k;
        if (!(p > 0.0)) throw ConfigError("zero propensity for " + shortlist[a].label());
        if (p < config.min_propensity)
            throw ConfigError("propensity of " + shortlist[a].label() + " is below the configured floor");
        out.action_probs.push_back(p);
    }
    std::vector<double> cumulative(k_count);
    std::partial_sum(out.action_probs.begin(), out.action_probs.end(), cumulative.begin());

    const std::size_t n = panel.size();
    const CounterRng rng(seed, streams::kLogger);
    const auto floors = panel.floors();
    const auto bids = panel.bids();
    out.actions.resize(n);
    out.propensities.resize(n);
    out.rewards.resize(n);
    out.action_floors.resize(n * k_count);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < k_count; ++a)
            out.action_floors[i * k_count + a] = apply_policy(shortlist[a], floors[i], bids[i], catalog);
        const double u = rng.uniform(i);
        std::size_t a = 0;
        while (a + 1 < k_count && u >= cumulative[a]) ++a;
        out.actions[i] = static_cast<std::uint16_t>(a);
        out.propensities[i] = out.action_probs[a];
        out.rewards[i] = replay_reward(panel, i, out.action_floors[i * k_count + a]);
    }
    return out;
}

// ---------------------------------------------------------------------------

double ReplayRewardModel::predict(const LoggedActionPanel& logged, std::size_t row, std::size_t action) const {
    return static_cast<double>(replay_reward(logged.panel, row, logged.floor(row, action)));
}

LoggedRewardModel::LoggedRewardModel(const LoggedActionPanel& logged, std::span<const std::size_t> rows,
                                     const ModelConfig& config)
    : config_(config), by_action_(logged.n_actions()) {
    config_.validate();
    for (auto& m : by_action_) m.set_smoothing(config_.smoothing);
    for (std::size_t i : rows)
        by_action_[logged.actions[i]].add(context_hash(logged.panel, i, config_.features),
                                          static_cast<double>(logged.rewards[i]));
}

double LoggedRewardModel::predict(const LoggedActionPanel& logged, std::size_t row, std::size_t action) const {
    return by_action_.at(action).predict(context_hash(logged.panel, row, config_.features));
}

double OutcomeModelSet::fill_probability(const Panel& panel, std::size_t i) const {
    return fill_.predict(context_hash(panel, i, config_.features));
}

double OutcomeModelSet::click_probability(const Panel& panel, std::size_t i) const {
    return ctr_.predict(context_hash(panel, i, config_.features));
}

double OutcomeModelSet::expected_pay(const Panel& panel, std::size_t i, std::size_t action) const {
    return pay_.at(action).predict(context_hash(panel, i, config_.features));
}

double OutcomeModelSet::expected_value(const Panel& panel, std::size_t i, std::size_t action) const {
    return value_.at(action).predict(context_hash(panel, i, config_.features));
}

double OutcomeModelSet::predict(const LoggedActionPanel& logged, std::size_t row, std::size_t action) const {
    const int id = logged.shortlist.at(action).id;
    const auto it = std::find(action_ids_.begin(), action_ids_.end(), id);
    if (it == action_ids_.end()) throw SupportError("outcome models were not fit for P" + std::to_string(id));
    return expected_pay(logged.panel, row, static_cast<std::size_t>(it - action_ids_.begin()));
}

OutcomeModelSet fit_outcome_models(const Panel& train, std::span<const PolicySpec> shortlist,
                                   const PolicyCatalog& catalog, const ModelConfig& config) {
    config.validate();
    if (train.empty()) throw EmptyPanelError("cannot fit outcome models on an empty panel");
    OutcomeModelSet m;
    m.config_ = config;
    m.fill_.set_smoothing(config.smoothing);
    m.ctr_.set_smoothing(config.smoothing);
    m.pay_.resize(shortlist.size());
    m.value_.resize(shortlist.size());
    for (const auto& s : shortlist) m.action_ids_.push_back(s.id);

    const auto filled = train.filled();
    const auto clicked = train.clicked();
    const auto converted = train.converted();
    const auto floors = train.floors();
    const auto bids = train.bids();
    for (std::size_t i = 0; i < train.size(); ++i) {
        const std::uint64_t key = context_hash(train, i, config.features);
        m.fill_.add(key, filled[i]);
        if (filled[i]) m.ctr_.add(key, clicked[i]);
        for (std::size_t a = 0; a < shortlist.size(); ++a) {
            const Money f = apply_policy(shortlist[a], floors[i], bids[i], catalog);
            const Money r = replay_reward(train, i, f);
            m.pay_[a].add(key, static_cast<double>(r));
            const bool kept = filled[i] && bids[i] >= f;
            m.value_[a].add(key, kept ? static_cast<double>(value_proxy(clicked[i], converted[i])) : 0.0);
        }
    }
    return m;
}

// ---------------------------------------------------------------------------

CalibrationCurve calibration_curve(std::string model, std::span<const double> predictions,
                                   std::span<const double> outcomes, std::size_t n_bins, std::size_t min_bin) {
    if (predictions.size() != outcomes.size()) throw ContractError("calibration inputs differ in length");
    if (predictions.empty()) throw EmptyPanelError("calibration needs held-out rows");
    if (n_bins == 0) throw ConfigError("calibration needs at least one bin");
    CalibrationCurve curve;
    curve.model = std::move(model);
    const std::size_t n = predictions.size();
    if (n_bins > n) {
        curve.warning = "requested " + std::to_string(n_bins) + " bins for " + std::to_string(n) +
                        " rows; using " + std::to_string(n);
        n_bins = n;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return predictions[a] < predictions[b]; });
    std::size_t pos = 0;
    for (std::size_t b = 0; b < n_bins; ++b) {
        const std::size_t size = n / n_bins + (b < n % n_bins ? 1 : 0);
        CalibrationBin bin;
        double sp = 0.0, so = 0.0;
        for (std::size_t j = pos; j < pos + size; ++j) {
            sp += predictions[order[j]];
            so += outcomes[order[j]];
        }
        pos += size;
        bin.count = size;
        bin.mean_prediction = sp / static_cast<double>(size);
        bin.mean_outcome = so / static_cast<double>(size);
        if (size >= min_bin) curve.max_gap = std::max(curve.max_gap, std::abs(bin.mean_prediction - bin.mean_outcome));
        curve.bins.push_back(bin);
    }
    return curve;
}

CalibrationReport calibration_report(const OutcomeModelSet& models, const Panel& test, std::size_t n_bins) {
    if (test.empty()) throw EmptyPanelError("calibration needs a non-empty held-out panel");
    CalibrationReport report;
    std::vector<double> pred, out, cpred, cout_;
    for (std::size_t i = 0; i < test.size(); ++i) {
        pred.push_back(models.fill_probability(test, i));
        out.push_back(test.filled()[i]);
        if (test.filled()[i]) {
            cpred.push_back(models.click_probability(test, i));
            cout_.push_back(test.clicked()[i]);
        }
    }
    report.curves.push_back(calibration_curve("fill", pred, out, n_bins));
    if (!cpred.empty()) report.curves.push_back(calibration_curve("click", cpred, cout_, n_bins));
    return report;
}

}  // namespace floorlab
