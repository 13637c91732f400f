#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "floorlab/money.hpp"
#include "floorlab/panel.hpp"
#include "floorlab/policy.hpp"

namespace floorlab {

enum class ContextKey { exchange, region, advertiser, day_of_week, hour, slot, device };

const char* context_key_name(ContextKey key);
ContextKey parse_context_key(const std::string& name);

/// Weekday 0..6 (Sunday = 0) of a yyyymmdd day key; keys that are not
/// calendar dates fall back to key mod 7.
int day_of_week(std::int32_t day_key);

/// Value of one context dimension for row i.
std::int64_t context_value(const Panel& panel, std::size_t i, ContextKey key);

/// Hash of the selected context values for row i.
std::uint64_t context_hash(const Panel& panel, std::size_t i, std::span<const ContextKey> features);

struct ModelConfig {
    std::vector<ContextKey> features = {ContextKey::exchange, ContextKey::region, ContextKey::advertiser,
                                        ContextKey::day_of_week};
    double smoothing = 1.0;  // pseudo-count pulling probability bins toward the global mean

    void validate() const;
};

/// Per-bin means with a global fallback. With alpha > 0 each bin is shrunk
/// toward the global mean by alpha pseudo-observations; alpha = 0 gives raw
/// bin means.
class BinnedMeanModel {
public:
    BinnedMeanModel() = default;

    void add(std::uint64_t key, double y);
    void set_smoothing(double alpha) { alpha_ = alpha; }

    double predict(std::uint64_t key) const;
    double global_mean() const { return count_ == 0 ? 0.0 : sum_ / static_cast<double>(count_); }
    std::size_t bins() const { return cells_.size(); }
    std::size_t count() const { return count_; }

private:
    struct Cell {
        double sum = 0.0;
        std::size_t count = 0;
    };
    std::unordered_map<std::uint64_t, Cell> cells_;
    double sum_ = 0.0;
    std::size_t count_ = 0;
    double alpha_ = 0.0;
};

// ---------------------------------------------------------------------------
// Logger
// ---------------------------------------------------------------------------

struct LoggerConfig {
    double epsilon = 0.2;           // uniform exploration mass
    double status_quo_tilt = 0.25;  // share of the remaining mass on the status-quo action
    int status_quo_policy = 0;
    double min_propensity = 1e-3;
    Money floor_tolerance = 0;  // floors within this many minor units count as the same action

    void validate() const;
};

/// Logged actions over a policy shortlist. Action k on row i is the floor
/// shortlist[k] sets on that row; rewards follow the replay contract.
struct LoggedActionPanel {
    Panel panel;
    PolicyCatalog catalog;
    std::vector<PolicySpec> shortlist;
    std::vector<double> action_probs;  // sampling distribution, same for every context
    std::size_t status_quo_action = 0;
    Money floor_tolerance = 0;

    std::vector<std::uint16_t> actions;
    std::vector<double> propensities;  // e(A_i | X_i), exactly as sampled
    std::vector<Money> rewards;
    std::vector<Money> action_floors;  // row-major n x K

    std::size_t size() const { return actions.size(); }
    std::size_t n_actions() const { return shortlist.size(); }
    Money floor(std::size_t row, std::size_t action) const { return action_floors[row * n_actions() + action]; }
    std::size_t action_index(int policy_id) const;
};

/// Replay reward for setting `floor` on row i: filled * 1{bid >= floor} * max(pay, floor).
Money replay_reward(const Panel& panel, std::size_t i, Money floor);

/// Throws ConfigError for an empty shortlist or any propensity below the floor.
LoggedActionPanel simulate_logger(const Panel& panel, std::span<const PolicySpec> shortlist,
                                  const PolicyCatalog& catalog, const LoggerConfig& config, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Reward / outcome models
// ---------------------------------------------------------------------------

/// m(X_i, a): expected reward of action a on logged row i.
class RewardModel {
public:
    virtual ~RewardModel() = default;
    virtual double predict(const LoggedActionPanel& logged, std::size_t row, std::size_t action) const = 0;
};

/// The exact replay reward; a perfect outcome model.
class ReplayRewardModel final : public RewardModel {
public:
    double predict(const LoggedActionPanel& logged, std::size_t row, std::size_t action) const override;
};

/// Binned mean of logged rewards per (context, action), shrunk toward the
/// action mean, fit on a subset of logged rows.
class LoggedRewardModel final : public RewardModel {
public:
    LoggedRewardModel(const LoggedActionPanel& logged, std::span<const std::size_t> rows, const ModelConfig& config);
    double predict(const LoggedActionPanel& logged, std::size_t row, std::size_t action) const override;

private:
    ModelConfig config_;
    std::vector<BinnedMeanModel> by_action_;
};

/// Fill, click, payment and value-proxy models fit on a training panel.
/// Payment and value models are indexed by shortlist action and predict the
/// replay reward and retained value proxy under that action's floor.
class OutcomeModelSet final : public RewardModel {
public:
    const ModelConfig& config() const { return config_; }
    std::span<const int> action_ids() const { return action_ids_; }

    double fill_probability(const Panel& panel, std::size_t i) const;
    double click_probability(const Panel& panel, std::size_t i) const;  // given filled
    double expected_pay(const Panel& panel, std::size_t i, std::size_t action) const;
    double expected_value(const Panel& panel, std::size_t i, std::size_t action) const;

    double predict(const LoggedActionPanel& logged, std::size_t row, std::size_t action) const override;

private:
    friend OutcomeModelSet fit_outcome_models(const Panel&, std::span<const PolicySpec>, const PolicyCatalog&,
                                              const ModelConfig&);
    ModelConfig config_;
    std::vector<int> action_ids_;
    BinnedMeanModel fill_, ctr_;
    std::vector<BinnedMeanModel> pay_, value_;
};

/// Reads only the training panel. Throws EmptyPanelError on an empty panel
/// and ConfigError on an empty feature list.
OutcomeModelSet fit_outcome_models(const Panel& train, std::span<const PolicySpec> shortlist,
                                   const PolicyCatalog& catalog, const ModelConfig& config = {});

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

struct CalibrationBin {
    double mean_prediction = 0.0;
    double mean_outcome = 0.0;
    std::size_t count = 0;
};

struct CalibrationCurve {
    std::string model;
    std::vector<CalibrationBin> bins;
    double max_gap = 0.0;  // over bins with count >= min_bin
    std::string warning;
};

/// Equal-frequency bins over predictions sorted ascending (ties by row).
/// Fewer bins than requested when there are fewer rows, with a warning.
CalibrationCurve calibration_curve(std::string model, std::span<const double> predictions,
                                   std::span<const double> outcomes, std::size_t n_bins = 10,
                                   std::size_t min_bin = 1);

struct CalibrationReport {
    std::vector<CalibrationCurve> curves;  // fill, then click among filled rows
};

CalibrationReport calibration_report(const OutcomeModelSet& models, const Panel& test, std::size_t n_bins = 10);

}  // namespace floorlab
