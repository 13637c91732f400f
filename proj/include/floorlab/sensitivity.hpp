#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace floorlab {

/// Lift after an adverse response removes a share rho of policy yield:
/// (1 + lift0)(1 - rho) - 1. Throws DomainError unless rho is in [0, 1).
double response_adjusted_lift(double lift0, double rho);

/// Response-loss share that erases lift0: lift0 / (1 + lift0). Throws
/// DomainError for lift0 <= -1.
double breakeven_rho(double lift0);

/// Lower tail with the median-to-p10 gap widened by 1/sqrt(s). Throws
/// DomainError for s outside (0, 1] or p10 > median.
double support_adjusted_lower(double median, double p10, double s);

struct SensitivityConfig {
    double breakeven_threshold = 0.15;
    double rho_max = 0.60;
    int rho_points = 31;
    std::vector<double> support_scales = {1.0, 0.75, 0.5, 0.25, 0.10, 0.05};

    void validate() const;
};

/// Evenly spaced grid on [0, rho_max], endpoints included.
std::vector<double> rho_grid(const SensitivityConfig& config);

struct RobustnessCheck {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
};

struct RobustnessSummary {
    int policy_id = 0;
    double replay_lift = 0.0;
    double median_dr_lift = 0.0;
    double p10_dr_lift = 0.0;
    double breakeven_rho = 0.0;
    std::vector<std::pair<double, double>> response_curve;  // (rho, adjusted lift)
    std::vector<std::pair<double, double>> support_curve;   // (s, adjusted lower tail)
    std::array<RobustnessCheck, 5> checks;
    int checks_passed = 0;
};

/// Five checks: positive replay lift, positive p10 DR lift, break-even at or
/// above the threshold, positive lower tail at every support scale, and a
/// recommendation that stops short of launch unless online evidence exists.
/// `recommends_launch_without_online` is true when the action would be launch
/// with I = 0.
RobustnessSummary robustness_summary(int policy_id, double replay_lift, double median_dr_lift,
                                     double p10_dr_lift, const SensitivityConfig& config = {},
                                     bool recommends_launch_without_online = false);

}  // namespace floorlab
