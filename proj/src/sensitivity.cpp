#include "floorlab/sensitivity.hpp"

#include <algorithm>
#include <cmath>

#include "floorlab/error.hpp"

namespace floorlab {

double response_adjusted_lift(double lift0, double rho) {
    if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("response-loss share must be in [0, 1)");
    return (1.0 + lift0) * (1.0 - rho) - 1.0;
}

double breakeven_rho(double lift0) {
    if (!(lift0 > -1.0)) throw DomainError("break-even needs lift > -1");
    return lift0 / (1.0 + lift0);
}

double support_adjusted_lower(double median, double p10, double s) {
    if (!(s > 0.0 && s <= 1.0)) throw DomainError("support scale must be in (0, 1]");
    if (p10 > median) throw DomainError("p10 above median");
    if (s == 1.0) return p10;
    return median - (median - p10) / std::sqrt(s);
}

void SensitivityConfig::validate() const {
    if (!(breakeven_threshold >= 0.0 && breakeven_threshold < 1.0))
        throw ConfigError("sensitivity.breakeven_threshold must be in [0, 1)");
    if (!(rho_max >= 0.0 && rho_max < 1.0)) throw ConfigError("sensitivity.rho_max must be in [0, 1)");
    if (rho_points < 2) throw ConfigError("sensitivity.rho_points must be >= 2");
    if (support_scales.empty()) throw ConfigError("sensitivity.support_scales is empty");
    for (double s : support_scales)
        if (!(s > 0.0 && s <= 1.0)) throw ConfigError("support scales must be in (0, 1]");
}

std::vector<double> rho_grid(const SensitivityConfig& config) {
    std::vector<double> grid;
    for (int i = 0; i < config.rho_points; ++i)
        grid.push_back(config.rho_max * i / (config.rho_points - 1));
    return grid;
}

RobustnessSummary robustness_summary(int policy_id, double replay_lift, double median_dr_lift,
                                     double p10_dr_lift, const SensitivityConfig& config,
                                     bool recommends_launch_without_online) {
    config.validate();
    RobustnessSummary s;
    s.policy_id = policy_id;
    s.replay_lift = replay_lift;
    s.median_dr_lift = median_dr_lift;
    s.p10_dr_lift = p10_dr_lift;
    s.breakeven_rho = replay_lift > -1.0 ? breakeven_rho(replay_lift) : 0.0;
    if (replay_lift > -1.0)
        for (double rho : rho_grid(config)) s.response_curve.emplace_back(rho, response_adjusted_lift(replay_lift, rho));

    const double p10 = std::min(p10_dr_lift, median_dr_lift);
    double min_support = p10;
    for (double scale : config.support_scales) {
        const double l = support_adjusted_lower(median_dr_lift, p10, scale);
        s.support_curve.emplace_back(scale, l);
        min_support = std::min(min_support, l);
    }

    s.checks[0] = {"positive_replay_lift", replay_lift > 0.0, replay_lift, 0.0};
    s.checks[1] = {"positive_p10_dr_lift", p10_dr_lift > 0.0, p10_dr_lift, 0.0};
    s.checks[2] = {"breakeven_above_threshold", s.breakeven_rho >= config.breakeven_threshold, s.breakeven_rho,
                   config.breakeven_threshold};
    s.checks[3] = {"positive_lower_tail_all_support_scales", min_support > 0.0, min_support, 0.0};
    s.checks[4] = {"validation_first_recommendation", !recommends_launch_without_online,
                   recommends_launch_without_online ? 0.0 : 1.0, 1.0};
    for (const auto& c : s.checks) s.checks_passed += c.pass;
    return s;
}

}  // namespace floorlab
