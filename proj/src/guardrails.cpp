#include "floorlab/guardrails.hpp"

#include <algorithm>

#include "floorlab/error.hpp"

namespace floorlab {

namespace {

constexpr std::array<Guardrail, kGuardrailCount> kAll = {
    Guardrail::yield_lift,           Guardrail::impression_retention, Guardrail::daily_impression_retention,
    Guardrail::click_retention,      Guardrail::conversion_retention, Guardrail::value_retention,
    Guardrail::daily_positive_lift,
};

GuardrailCell cell(Guardrail g, double measured, double threshold, std::string note = {}) {
    return {g, measured, threshold, measured >= threshold, std::move(note)};
}

}  // namespace

const char* guardrail_name(Guardrail g) {
    switch (g) {
        case Guardrail::yield_lift: return "yield_lift";
        case Guardrail::impression_retention: return "impression_retention";
        case Guardrail::daily_impression_retention: return "daily_impression_retention";
        case Guardrail::click_retention: return "click_retention";
        case Guardrail::conversion_retention: return "conversion_retention";
        case Guardrail::value_retention: return "value_retention";
        case Guardrail::daily_positive_lift: return "daily_positive_lift";
    }
    return "?";
}

std::span<const Guardrail> all_guardrails() { return kAll; }

void GuardrailConfig::validate() const {
    auto unit = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string("guardrails.") + name + " must be in [0,1]");
    };
    if (!(min_yield_lift >= 0.0)) throw ConfigError("guardrails.min_yield_lift must be >= 0");
    unit(min_impression_retention, "min_impression_retention");
    unit(min_daily_impression_retention, "min_daily_impression_retention");
    unit(min_click_retention, "min_click_retention");
    unit(min_conversion_retention, "min_conversion_retention");
    unit(min_value_retention, "min_value_retention");
}

const GuardrailRow& GuardrailMatrix::row(int policy_id) const {
    for (const auto& r : rows)
        if (r.policy_id == policy_id) return r;
    throw ContractError("no guardrail row for P" + std::to_string(policy_id));
}

std::vector<int> GuardrailMatrix::feasible() const {
    std::vector<int> ids;
    for (const auto& r : rows)
        if (r.all_pass) ids.push_back(r.policy_id);
    return ids;
}

GuardrailMatrix screen(std::span<const ReplayResult> results, const GuardrailConfig& config) {
    config.validate();
    GuardrailMatrix m;
    for (const auto& r : results) {
        if (config.require_daily_positive_lift && r.daily.empty())
            throw ConfigError("daily lift screen requires a daily breakdown for " + std::string("P") +
                              std::to_string(r.policy_id));
        GuardrailRow row;
        row.policy_id = r.policy_id;

        double daily_min = 1.0;
        int defined = 0, positive = 0;
        for (const auto& d : r.daily) {
            if (d.baseline_filled > 0) daily_min = std::min(daily_min, d.retained_share);
            if (d.lift) {
                ++defined;
                if (*d.lift > 0.0) ++positive;
            }
        }

        row.cells[0] = cell(Guardrail::yield_lift, r.lift, config.min_yield_lift);
        row.cells[1] = cell(Guardrail::impression_retention, r.impression_share, config.min_impression_retention);
        row.cells[2] = cell(Guardrail::daily_impression_retention, daily_min, config.min_daily_impression_retention);
        row.cells[3] = cell(Guardrail::click_retention, r.click_share, config.min_click_retention,
                            r.clicks_vacuous ? "no baseline clicks; vacuous pass" : "");
        row.cells[4] = cell(Guardrail::conversion_retention, r.conversion_share, config.min_conversion_retention,
                            r.conversions_vacuous ? "no baseline conversions; vacuous pass" : "");
        row.cells[5] = cell(Guardrail::value_retention, r.value_proxy_share, config.min_value_retention,
                            r.baseline_value_proxy == 0 ? "no baseline value proxy; vacuous pass" : "");

        auto& daily = row.cells[6];
        daily.guardrail = Guardrail::daily_positive_lift;
        daily.threshold = 1.0;
        daily.measured = defined == 0 ? 0.0 : static_cast<double>(positive) / defined;
        if (!config.require_daily_positive_lift) {
            daily.pass = true;
            daily.note = "disabled";
        } else {
            daily.pass = defined > 0 && positive == defined;
            if (defined < static_cast<int>(r.daily.size()))
                daily.note = std::to_string(r.daily.size() - defined) + " zero-baseline day(s) excluded";
        }

        row.passed = static_cast<int>(std::count_if(row.cells.begin(), row.cells.end(),
                                                    [](const GuardrailCell& c) { return c.pass; }));
        row.all_pass = row.passed == static_cast<int>(kGuardrailCount);
        m.rows.push_back(std::move(row));
    }
    return m;
}

}  // namespace floorlab
