#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "floorlab/replay.hpp"

namespace floorlab {

/// Q = clicks + 10 * conversions.
constexpr std::int64_t value_proxy(std::int64_t clicks, std::int64_t conversions) {
    return clicks + 10 * conversions;
}

struct GuardrailConfig {
    double min_yield_lift = 0.005;
    double min_impression_retention = 0.98;
    double min_daily_impression_retention = 0.98;
    double min_click_retention = 0.97;
    double min_conversion_retention = 0.90;
    double min_value_retention = 0.97;
    bool require_daily_positive_lift = true;

    /// Throws ConfigError when a threshold is out of range.
    void validate() const;
};

enum class Guardrail {
    yield_lift,
    impression_retention,
    daily_impression_retention,
    click_retention,
    conversion_retention,
    value_retention,
    daily_positive_lift,
};

inline constexpr std::size_t kGuardrailCount = 7;
const char* guardrail_name(Guardrail g);
std::span<const Guardrail> all_guardrails();

struct GuardrailCell {
    Guardrail guardrail = Guardrail::yield_lift;
    double measured = 0.0;  // daily_positive_lift: share of defined days with positive lift
    double threshold = 0.0;
    bool pass = false;
    std::string note;  // e.g. vacuous share, disabled screen
};

struct GuardrailRow {
    int policy_id = 0;
    std::array<GuardrailCell, kGuardrailCount> cells;
    int passed = 0;
    bool all_pass = false;
};

struct GuardrailMatrix {
    std::vector<GuardrailRow> rows;  // parallel to the screened results

    const GuardrailRow& row(int policy_id) const;
    /// Ids of policies passing every screen, in input order.
    std::vector<int> feasible() const;
};

/// Every comparison is measured >= threshold. Throws ConfigError when the
/// daily-lift screen is required but a result carries no daily breakdown.
GuardrailMatrix screen(std::span<const ReplayResult> results, const GuardrailConfig& config = {});

}  // namespace floorlab
