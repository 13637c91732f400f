#include <gtest/gtest.h>

#include <cmath>

#include "floorlab/error.hpp"
#include "floorlab/sensitivity.hpp"

using namespace floorlab;

TEST(Response, ClosedForm) {
    EXPECT_DOUBLE_EQ(response_adjusted_lift(0.3, 0.0), 0.3);
    EXPECT_NEAR(response_adjusted_lift(0.477, 0.323), 0.0, 1e-3);
    EXPECT_DOUBLE_EQ(response_adjusted_lift(0.5, 0.5), -0.25);
    EXPECT_THROW(response_adjusted_lift(0.5, 1.0), DomainError);
    EXPECT_THROW(response_adjusted_lift(0.5, -0.1), DomainError);
}

TEST(Breakeven, ClosedForm) {
    EXPECT_NEAR(breakeven_rho(0.477), 0.3229, 5e-4);
    EXPECT_EQ(breakeven_rho(0.0), 0.0);
    EXPECT_DOUBLE_EQ(breakeven_rho(1.0), 0.5);
    EXPECT_THROW(breakeven_rho(-1.0), DomainError);
    for (double l : {0.01, 0.2, 0.477, 3.0})
        EXPECT_NEAR(response_adjusted_lift(l, breakeven_rho(l)), 0.0, 1e-12) << l;
}

TEST(SupportAdjusted, ClosedForm) {
    EXPECT_EQ(support_adjusted_lower(0.5, 0.458, 1.0), 0.458);
    EXPECT_NEAR(support_adjusted_lower(0.50, 0.458, 0.25), 0.416, 1e-12);
    EXPECT_THROW(support_adjusted_lower(0.5, 0.4, 0.0), DomainError);
    EXPECT_THROW(support_adjusted_lower(0.5, 0.4, 1.5), DomainError);
    EXPECT_THROW(support_adjusted_lower(0.4, 0.5, 0.5), DomainError);
    // Monotone: less support never raises the lower tail.
    double prev = 1.0;
    for (double s : {1.0, 0.75, 0.5, 0.25, 0.1, 0.05}) {
        const double v = support_adjusted_lower(0.5, 0.458, s);
        EXPECT_LE(v, prev);
        prev = v;
    }
}

TEST(Grid, ThirtyOnePointsToSixtyPercent) {
    const auto g = rho_grid({});
    ASSERT_EQ(g.size(), 31u);
    EXPECT_EQ(g.front(), 0.0);
    EXPECT_DOUBLE_EQ(g.back(), 0.6);
    EXPECT_NEAR(g[1], 0.02, 1e-15);
}

TEST(Robustness, PriorityPolicyPassesAllFive) {
    const auto s = robustness_summary(18, 0.477, 0.50, 0.458);
    EXPECT_EQ(s.checks_passed, 5);
    EXPECT_NEAR(s.breakeven_rho, 0.3229, 5e-4);
    EXPECT_EQ(s.response_curve.size(), 31u);
    EXPECT_EQ(s.support_curve.size(), 6u);
    for (auto [scale, lower] : s.support_curve) EXPECT_GT(lower, 0.0) << scale;
    EXPECT_EQ(s.checks[0].name, "positive_replay_lift");
    EXPECT_EQ(s.checks[4].name, "validation_first_recommendation");
}

TEST(Robustness, ZeroLiftFails) {
    const auto s = robustness_summary(0, 0.0, 0.0, 0.0);
    EXPECT_EQ(s.breakeven_rho, 0.0);
    EXPECT_LT(s.checks_passed, 5);
}

TEST(Robustness, NegativeLowerTailFails) {
    const auto s = robustness_summary(3, 0.2, 0.1, -0.05);
    EXPECT_FALSE(s.checks[1].pass);
    EXPECT_FALSE(s.checks[3].pass);
}

TEST(Robustness, LaunchWithoutOnlineEvidenceFailsFifthCheck) {
    const auto s = robustness_summary(18, 0.477, 0.50, 0.458, {}, true);
    EXPECT_FALSE(s.checks[4].pass);
    EXPECT_EQ(s.checks_passed, 4);
}

TEST(Robustness, ConfigValidation) {
    SensitivityConfig cfg;
    cfg.rho_points = 1;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.support_scales = {0.0};
    EXPECT_THROW(cfg.validate(), ConfigError);
}
