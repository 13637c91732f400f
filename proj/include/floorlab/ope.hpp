#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "floorlab/guardrails.hpp"
#include "floorlab/nuisance.hpp"

namespace floorlab {

enum class OpeMethod { dm, ipw, dr };
enum class LowerTailMode { boot_p10, z_score };

const char* ope_method_name(OpeMethod m);
const char* lower_tail_mode_name(LowerTailMode m);
LowerTailMode parse_lower_tail_mode(const std::string& name);

inline constexpr double kNoCap = std::numeric_limits<double>::infinity();

struct OpeConfig {
    std::size_t k_folds = 5;
    std::size_t boot_B = 200;
    double alpha = 0.10;
    LowerTailMode mode = LowerTailMode::boot_p10;
    std::vector<double> caps = {1, 2, 5, 10, 20, 50, kNoCap};
    double min_ess_share = 0.10;
    double max_p99_weight = 10.0;
    std::size_t min_cell = 1000;
    double large_negative_lift = -0.05;
    std::vector<ContextKey> segment_dimensions = {ContextKey::exchange, ContextKey::region, ContextKey::advertiser};
    ModelConfig model;
    std::uint64_t seed = 1;
    std::size_t threads = 1;

    void validate() const;
};

/// Where a target policy lands in the logged action space, row by row.
struct TargetSupport {
    std::vector<Money> floors;           // f^pi(X_i)
    std::vector<std::uint16_t> action;   // the target's own action if logged, else the first setting that floor
    std::vector<double> propensity;      // e(pi(X_i) | X_i): mass of every action setting that floor
    std::vector<double> weights;         // 1{A_i matches} / propensity
    std::size_t matched = 0;
};

/// Throws SupportError when some row's target floor is set by no logged
/// action, OverlapError when a matched row has propensity <= 0.
TargetSupport resolve_target(const LoggedActionPanel& logged, const PolicySpec& target);

/// Per-row DR scores m(X, pi) + min(w, cap) (Y - m(X, pi)); on matched rows
/// the logged action sets the same floor as the target.
std::vector<double> dr_scores(const LoggedActionPanel& logged, const TargetSupport& support,
                              const RewardModel& model, double cap = kNoCap);

double estimate_value(const LoggedActionPanel& logged, const PolicySpec& target, const RewardModel& model,
                      OpeMethod method);

/// (sum w)^2 / sum w^2. Throws SupportError when every weight is zero.
double effective_sample_size(std::span<const double> weights);

/// Nearest-rank 99th percentile of the nonzero weights (0 if none).
double weight_p99(std::span<const double> weights);

struct ClipPoint {
    double cap = 0.0;
    double ipw = 0.0;
    double dr = 0.0;
};

/// Caps must be positive and ascending; infinity means unclipped.
std::vector<ClipPoint> clipping_sweep(const LoggedActionPanel& logged, const PolicySpec& target,
                                      std::span<const double> caps, const RewardModel& model);

/// Reward model whose prediction for row i comes from a model fit on the
/// rows outside i's fold (fold = i mod k).
class CrossfitRewardModel final : public RewardModel {
public:
    CrossfitRewardModel(const LoggedActionPanel& logged, std::size_t k_folds, const ModelConfig& config);
    double predict(const LoggedActionPanel& logged, std::size_t row, std::size_t action) const override;
    std::size_t folds() const { return folds_.size(); }

private:
    std::vector<LoggedRewardModel> folds_;
};

struct BootstrapLift {
    double point = 0.0;  // lift from the full-sample scores
    double median = 0.0, p10 = 0.0, p90 = 0.0;
    double se = 0.0;     // standard deviation over replicates
    std::size_t replicates = 0;
};

/// Lift of each target's score mean over the baseline's, bootstrapped with
/// the same resampled rows for every target. Deterministic for a seed at any
/// thread count.
std::vector<BootstrapLift> bootstrap_lifts(std::span<const std::vector<double>> target_scores,
                                           std::span<const double> baseline_scores, std::size_t B,
                                           std::uint64_t seed, std::size_t threads = 1);

struct CrossfitResult {
    BootstrapLift lift;
    std::vector<double> target_scores, baseline_scores;
    std::vector<std::string> warnings;  // e.g. folds with no matched rows
};

/// Cross-fitted DR lift of target over the status-quo policy.
CrossfitResult crossfit_dr(const LoggedActionPanel& logged, const PolicySpec& target, const OpeConfig& config);

/// z_{1-alpha} one-sided lower bound. Throws DomainError for se < 0 or alpha
/// outside (0, 1).
double lower_bound_score(double lift, double se, double alpha = 0.10);

struct OpeEstimate {
    int policy_id = 0;
    std::size_t n = 0;
    std::size_t matched = 0;
    double v_dm = 0.0, v_ipw = 0.0, v_dr = 0.0;
    double lift_dm = 0.0, lift_ipw = 0.0, lift_dr = 0.0;  // against the status quo, same estimator
    double ess = 0.0, ess_share = 0.0, p99_weight = 0.0;
    bool support_pass = false;
    std::vector<ClipPoint> clip_sweep;
    double crossfit_lift = 0.0;
    double boot_median = 0.0, boot_p10 = 0.0, boot_p90 = 0.0, boot_se = 0.0;
    double lower_bound = 0.0;  // L_alpha from crossfit_lift and boot_se
    std::vector<std::string> warnings;
};

/// Every OPE diagnostic for each target. `models` supplies DM and the
/// uncrossed DR; the bootstrap lifts use out-of-fold logged-reward models.
std::vector<OpeEstimate> evaluate_policies(const LoggedActionPanel& logged, std::span<const PolicySpec> targets,
                                           const RewardModel& models, const OpeConfig& config);

/// Feasible policies ordered by the configured lower-tail score, ties by
/// larger ess_share then smaller id. Empty when no estimate is feasible.
std::vector<int> rank_conservative(std::span<const OpeEstimate> estimates, const GuardrailMatrix& guard,
                                   LowerTailMode mode = LowerTailMode::boot_p10);

double lower_tail_score(const OpeEstimate& e, LowerTailMode mode);

struct SegmentLift {
    std::string dimension;
    std::string value;  // "other" for pooled small cells
    std::size_t n_rows = 0;
    std::optional<double> dr_lift;  // nullopt when the cell's baseline score mean is zero
    bool flag_large_negative = false;
};

/// Per-cell ratio of target to baseline DR score means, for each dimension.
/// Cells smaller than min_cell are pooled into "other".
std::vector<SegmentLift> segment_heterogeneity(const LoggedActionPanel& logged,
                                               std::span<const double> target_scores,
                                               std::span<const double> baseline_scores,
                                               std::span<const ContextKey> dimensions, std::size_t min_cell = 1000,
                                               double large_negative = -0.05);

}  // namespace floorlab
