#include <gtest/gtest.h>

#include "floorlab/error.hpp"
#include "floorlab/guardrails.hpp"
#include "floorlab/synthgen.hpp"

using namespace floorlab;

namespace {

// A result that clears every screen by a small margin; tests perturb one field.
ReplayResult passing(int id) {
    ReplayResult r;
    r.policy_id = id;
    r.lift = 0.01;
    r.impression_share = 0.99;
    r.click_share = 0.98;
    r.conversion_share = 0.95;
    r.value_proxy_share = 0.98;
    for (int d = 0; d < 3; ++d) {
        DailyReplay day;
        day.day = 20130606 + d;
        day.baseline_filled = 100;
        day.retained = 99;
        day.retained_share = 0.99;
        day.lift = 0.01;
        r.daily.push_back(day);
    }
    return r;
}

const GuardrailCell& cell(const GuardrailRow& row, Guardrail g) { return row.cells[static_cast<std::size_t>(g)]; }

}  // namespace

TEST(ValueProxy, Arithmetic) {
    EXPECT_EQ(value_proxy(0, 0), 0);
    EXPECT_EQ(value_proxy(8729, 391), 12'639);
    EXPECT_EQ(value_proxy(5, 1), 15);
    static_assert(value_proxy(1, 1) == 11);
}

TEST(Guardrails, SevenNamedScreens) {
    EXPECT_EQ(all_guardrails().size(), kGuardrailCount);
    EXPECT_STREQ(guardrail_name(Guardrail::yield_lift), "yield_lift");
    EXPECT_STREQ(guardrail_name(Guardrail::daily_positive_lift), "daily_positive_lift");
}

TEST(Guardrails, BaselineFailsOnlyLiftScreens) {
    GenConfig cfg;
    cfg.n_rows = 10'000;
    const auto p = generate_panel(cfg);
    const auto c = build_catalog(floor_quantiles(p, FloorPopulation::positive_floors),
                                 floor_quantiles(p, FloorPopulation::all_floors));
    const std::vector<ReplayResult> rs = {replay_policy(p, c.by_id(0), c)};
    const auto m = screen(rs);
    const auto& row = m.row(0);
    EXPECT_FALSE(cell(row, Guardrail::yield_lift).pass);
    for (auto g : {Guardrail::impression_retention, Guardrail::daily_impression_retention, Guardrail::click_retention,
                   Guardrail::conversion_retention, Guardrail::value_retention}) {
        EXPECT_TRUE(cell(row, g).pass) << guardrail_name(g);
        EXPECT_EQ(cell(row, g).measured, 1.0);
    }
    EXPECT_FALSE(row.all_pass);
    EXPECT_TRUE(m.feasible().empty());
}

TEST(Guardrails, ThresholdsAreInclusive) {
    auto r = passing(1);
    r.lift = 0.005;
    r.impression_share = 0.98;
    r.click_share = 0.97;
    r.conversion_share = 0.90;
    r.value_proxy_share = 0.97;
    for (auto& d : r.daily) d.retained_share = 0.98;
    const std::vector<ReplayResult> rs = {r};
    const auto m = screen(rs);
    EXPECT_TRUE(m.row(1).all_pass);
    EXPECT_EQ(m.row(1).passed, 7);
}

TEST(Guardrails, ImpressionRetentionBelowThresholdFails) {
    auto r = passing(2);
    r.impression_share = 0.97;
    const std::vector<ReplayResult> rs = {r, passing(3)};
    const auto m = screen(rs);
    EXPECT_FALSE(cell(m.row(2), Guardrail::impression_retention).pass);
    EXPECT_FALSE(m.row(2).all_pass);
    EXPECT_EQ(m.row(2).passed, 6);
    EXPECT_EQ(m.feasible(), std::vector<int>{3});
}

TEST(Guardrails, DailyScreensUseWorstDay) {
    auto r = passing(4);
    r.daily[1].retained_share = 0.5;
    r.daily[2].lift = -0.01;
    const std::vector<ReplayResult> rs = {r};
    const auto m = screen(rs);
    EXPECT_DOUBLE_EQ(cell(m.row(4), Guardrail::daily_impression_retention).measured, 0.5);
    EXPECT_FALSE(cell(m.row(4), Guardrail::daily_impression_retention).pass);
    EXPECT_FALSE(cell(m.row(4), Guardrail::daily_positive_lift).pass);

    GuardrailConfig relaxed;
    relaxed.require_daily_positive_lift = false;
    EXPECT_TRUE(cell(screen(rs, relaxed).row(4), Guardrail::daily_positive_lift).pass);
}

TEST(Guardrails, MissingDailyDataIsConfigError) {
    auto r = passing(5);
    r.daily.clear();
    const std::vector<ReplayResult> rs = {r};
    EXPECT_THROW(screen(rs), ConfigError);
}

TEST(Guardrails, ImprovingAMeasureNeverFlipsToFail) {
    const double steps[] = {0.80, 0.90, 0.95, 0.97, 0.98, 0.99, 1.0};
    bool seen_pass = false;
    for (double s : steps) {
        auto r = passing(6);
        r.impression_share = s;
        r.click_share = s;
        r.value_proxy_share = s;
        const std::vector<ReplayResult> rs = {r};
        const bool pass = screen(rs).row(6).all_pass;
        if (seen_pass) EXPECT_TRUE(pass) << s;
        seen_pass = seen_pass || pass;
    }
    EXPECT_TRUE(seen_pass);
}

TEST(Guardrails, InvalidConfig) {
    GuardrailConfig cfg;
    cfg.min_click_retention = 1.5;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.min_yield_lift = -0.1;
    EXPECT_THROW(cfg.validate(), ConfigError);
}
