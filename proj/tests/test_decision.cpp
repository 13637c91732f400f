#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <map>

#include "floorlab/decision.hpp"
#include "floorlab/error.hpp"
#include "floorlab/stats.hpp"
#include "floorlab/synthgen.hpp"
#include "support.hpp"

using namespace floorlab;
using floorlab::testing::rec;

namespace {

// The stated decision map, written out independently of decide().
Action reference_map(unsigned bits, bool flag) {
    const bool all_but_i = (bits & 0x3F) == 0x3F;
    const bool i = bits & 0x40;
    const bool h = bits & (1u << 4);
    if (all_but_i && i) return Action::launch;
    if (all_but_i) return Action::validate_online;
    if (!h || flag) return Action::redesign;
    return Action::hold;
}

ReplayResult result(int id, double lift, MoneySum value, std::uint64_t hash = 7) {
    ReplayResult r;
    r.policy_id = id;
    r.lift = lift;
    r.value_sum = value;
    r.catalog_hash = hash;
    return r;
}

}  // namespace

TEST(DecisionMap, AllGateVectors) {
    for (unsigned mask = 0; mask < 128; ++mask) {
        const auto g = GateVector::from_bits(mask);
        EXPECT_EQ(g.bits(), mask);
        for (bool flag : {false, true}) {
            const Action a = decide(g, flag);
            EXPECT_EQ(a, reference_map(mask, flag)) << mask;
            if (a == Action::launch) EXPECT_TRUE(g[Gate::I].pass);
            if (a == Action::validate_online) EXPECT_TRUE(g.q_minus_i() && !g[Gate::I].pass);
        }
    }
}

TEST(DecisionMap, NamedCases) {
    EXPECT_EQ(decide(GateVector::from_bits(0x7F)), Action::launch);
    EXPECT_EQ(decide(GateVector::from_bits(0x3F)), Action::validate_online);
    EXPECT_EQ(decide(GateVector::from_bits(0x3F & ~(1u << 4))), Action::redesign);      // H = 0
    EXPECT_EQ(decide(GateVector::from_bits(0x3F & ~(1u << 3))), Action::hold);          // C = 0
    EXPECT_EQ(decide(GateVector::from_bits(0x3F & ~(1u << 3)), true), Action::redesign);
    EXPECT_EQ(parse_action("validate_online"), Action::validate_online);
    EXPECT_STREQ(action_name(Action::hold), "hold");
    EXPECT_THROW(parse_action("ship"), ConfigError);
}

TEST(DecisionMap, EnumerationIsFast) {
    const auto start = std::chrono::steady_clock::now();
    int launches = 0;
    for (int rep = 0; rep < 100; ++rep)
        for (unsigned mask = 0; mask < 128; ++mask) launches += decide(GateVector::from_bits(mask)) == Action::launch;
    EXPECT_EQ(launches, 100);
    EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(1));
}

TEST(Transfer, PassesWithPositiveTopRankAndRetention) {
    const std::vector<ReplayResult> disc = {result(0, 0, 100), result(18, 0.477, 147)};
    std::vector<ReplayResult> val = {result(0, 0, 100), result(18, 0.439, 144)};
    const auto t = transfer_gate(disc, val, 18);
    EXPECT_TRUE(t.available);
    EXPECT_TRUE(t.pass);
    EXPECT_EQ(t.validation_rank, 1);
    EXPECT_DOUBLE_EQ(t.validation_lift, 0.439);
}

TEST(Transfer, NegativeLiftFails) {
    const std::vector<ReplayResult> disc = {result(0, 0, 100), result(5, 0.1, 110)};
    const std::vector<ReplayResult> val = {result(0, 0, 100), result(5, -0.02, 98)};
    EXPECT_FALSE(transfer_gate(disc, val, 5).pass);
}

TEST(Transfer, RankFiveFailsAtRmaxThree) {
    std::vector<ReplayResult> disc, val;
    for (int id = 0; id < 6; ++id) {
        disc.push_back(result(id, 0.1 * id, 100 + 10 * id));
        val.push_back(result(id, 0.1 * (6 - id), 100 + 10 * (6 - id)));  // id 0 best ... id 5 worst
    }
    val[0] = result(0, 0, 100);
    // Values: id0 100, id1 150, id2 140, id3 130, id4 120, id5 110 -> id5 ranks 5th.
    const auto t = transfer_gate(disc, val, 5, 3);
    EXPECT_EQ(t.validation_rank, 5);
    EXPECT_FALSE(t.pass);
    EXPECT_TRUE(transfer_gate(disc, val, 5, 5).pass);
}

TEST(Transfer, TiesShareTheBetterRank) {
    const std::vector<ReplayResult> disc = {result(0, 0, 100), result(1, 0.2, 120), result(2, 0.2, 120)};
    const auto t = transfer_gate(disc, disc, 2, 1);
    EXPECT_EQ(t.validation_rank, 1);
    EXPECT_TRUE(t.pass);
}

TEST(Transfer, RetentionBelowThresholdFails) {
    const std::vector<ReplayResult> disc = {result(0, 0, 100), result(4, 0.1, 110)};
    auto val = disc;
    val[1].impression_share = 0.95;
    EXPECT_FALSE(transfer_gate(disc, val, 4).pass);
}

TEST(Transfer, EmptyValidationIsPlaceholder) {
    const std::vector<ReplayResult> disc = {result(0, 0, 100)};
    const auto t = transfer_gate(disc, {}, 0);
    EXPECT_FALSE(t.available);
    EXPECT_TRUE(t.pass);
    EXPECT_FALSE(t.note.empty());
}

TEST(Transfer, CatalogMismatchIsContractError) {
    const std::vector<ReplayResult> disc = {result(0, 0, 100, 1), result(18, 0.4, 140, 1)};
    const std::vector<ReplayResult> val = {result(0, 0, 100, 2), result(18, 0.4, 140, 2)};
    EXPECT_THROW(transfer_gate(disc, val, 18), ContractError);
}

TEST(Gates, PriorityPolicyWithoutOnlineEvidence) {
    EvidenceBundle e;
    e.policy_id = 18;
    e.replay = result(18, 0.477, 147);
    e.transfer = TransferResult{true, true, 0.439, 1, 1, 1, 1, 1, ""};
    OpeEstimate o;
    o.policy_id = 18;
    o.support_pass = true;
    o.boot_p10 = 0.458;
    e.ope = o;
    GuardrailRow row;
    row.policy_id = 18;
    row.all_pass = true;
    row.passed = 7;
    e.guardrails = row;
    e.breakeven_rho = 0.3229;
    auto g = evaluate_gates(e);
    EXPECT_EQ(g.bits(), 0x3Fu);
    EXPECT_EQ(decide(g), Action::validate_online);
    e.online_attestation = "switchback-2024-01";
    g = evaluate_gates(e);
    EXPECT_EQ(g.bits(), 0x7Fu);
    EXPECT_EQ(decide(g), Action::launch);

    e.online_attestation.clear();
    e.guardrails->all_pass = false;
    g = evaluate_gates(e);
    EXPECT_FALSE(g[Gate::H].pass);
    EXPECT_EQ(g.bits(), 0x2Fu);
    EXPECT_EQ(decide(g), Action::redesign);
}

TEST(Gates, MissingEvidenceNeverPasses) {
    const auto g = evaluate_gates(EvidenceBundle{});
    EXPECT_EQ(g.bits(), 0u);
    for (auto gate : {Gate::R, Gate::T, Gate::S, Gate::C, Gate::H, Gate::B}) EXPECT_EQ(g[gate].source, "missing");
}

TEST(Prune, WeakParetoKeepsTies) {
    std::vector<ReplayResult> rs = {result(0, 0.0, 100), result(1, 0.2, 120), result(2, 0.2, 120), result(3, 0.1, 110)};
    for (auto& r : rs) r.impression_share = 1.0;
    rs[3].impression_share = 0.99;
    GuardrailMatrix guard;
    for (const auto& r : rs) {
        GuardrailRow row;
        row.policy_id = r.policy_id;
        row.passed = 6;
        guard.rows.push_back(row);
    }
    EXPECT_EQ(prune_dominated(rs, guard), (std::vector<int>{1, 2}));
    guard.rows[3].passed = 7;  // more guardrails passed rescues P3
    EXPECT_EQ(prune_dominated(rs, guard), (std::vector<int>{1, 2, 3}));
}

TEST(Mde, NormalQuantileSum) {
    EXPECT_NEAR(normal_quantile(0.975) + normal_quantile(0.80), 2.80158, 1e-5);
    EXPECT_NEAR(normal_quantile(0.975), 1.95996, 5e-6);
    EXPECT_NEAR(normal_quantile(0.80), 0.84162, 5e-6);
}

TEST(Mde, ReportedBaselineYield) {
    EXPECT_NEAR(953'877'620.0 / 53'289'330.0, 17.89997, 5e-6);
}

TEST(Mde, SqrtLawAndOracle) {
    GenConfig cfg;
    cfg.n_rows = 50'000;
    const auto p = generate_panel(cfg);
    const std::vector<int> durations = {1, 2, 4, 7, 14, 16, 28};
    for (auto design : all_mde_designs()) {
        const auto c = mde_curve(p, design, durations);
        ASSERT_EQ(c.points.size(), durations.size());
        EXPECT_NEAR(c.points[2].relative, c.points[0].relative / 2, 1e-12);
        EXPECT_NEAR(c.points[6].relative, c.points[3].relative / 2, 1e-12);
        for (const auto& pt : c.points) {
            EXPECT_NEAR(pt.relative, c.c / std::sqrt(pt.days), 1e-12);
            EXPECT_NEAR(pt.absolute, c.baseline_yield * pt.relative, 1e-9);
        }
    }
    // Independent recomputation for the region-day design.
    std::map<std::pair<int, int>, std::pair<double, double>> cells;
    double pay = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto r = p.record(i);
        auto& cell = cells[{r.day, r.region}];
        cell.first += r.filled ? static_cast<double>(r.pay_price) : 0.0;
        cell.second += 1;
        pay += r.filled ? static_cast<double>(r.pay_price) : 0.0;
    }
    std::vector<double> y;
    for (const auto& [k, v] : cells) y.push_back(v.first / v.second);
    double m = 0.0;
    for (double v : y) m += v;
    m /= static_cast<double>(y.size());
    double ss = 0.0;
    for (double v : y) ss += (v - m) * (v - m);
    const double sigma = std::sqrt(ss / static_cast<double>(y.size() - 1));
    const double g = static_cast<double>(y.size()) / 7.0;
    const double y0 = pay / static_cast<double>(p.size());
    const auto c = mde_curve(p, MdeDesign::region_day, durations);
    EXPECT_EQ(c.units, y.size());
    EXPECT_NEAR(c.sigma, sigma, 1e-9);
    EXPECT_NEAR(c.baseline_yield, y0, 1e-12);
    EXPECT_NEAR(c.c, 2.8015852 * 2 * sigma / std::sqrt(g) / y0, 1e-6);
}

TEST(Mde, TooFewUnitsIsDesignError) {
    const auto p = Panel::from_records({rec(1, 100, 0, 50, true), rec(1, 100, 0, 60, true)});
    const std::vector<int> d = {1};
    EXPECT_THROW(mde_curve(p, MdeDesign::region_day, d), DesignError);
    EXPECT_THROW(mde_curve(Panel{}, MdeDesign::region_day, d), EmptyPanelError);
    EXPECT_EQ(parse_mde_design("exchange_hour"), MdeDesign::exchange_hour);
}

TEST(Ablation, UnresolvedCountsAndOverclaim) {
    const std::vector<ReplayResult> replay = {result(0, 0, 100), result(11, 0.355, 135), result(18, 0.477, 147)};
    const std::vector<ReplayResult> validation = {result(0, 0, 100), result(11, 0.30, 130), result(18, 0.439, 144)};
    GuardrailMatrix guard;
    for (int id : {0, 11, 18}) {
        GuardrailRow row;
        row.policy_id = id;
        row.all_pass = id != 0;
        guard.rows.push_back(row);
    }
    std::vector<OpeEstimate> ope(2);
    ope[0].policy_id = 11;
    ope[0].crossfit_lift = 0.35;
    ope[0].boot_p10 = 0.30;
    ope[1].policy_id = 18;
    ope[1].crossfit_lift = 0.47;
    ope[1].boot_p10 = 0.458;
    AblationInputs in;
    in.replay = replay;
    in.guard = &guard;
    in.ope = ope;
    in.validation = validation;
    in.full_selected = 18;
    in.full_action = Action::validate_online;
    const auto rules = default_ablation_rules();
    const auto rows = ablation(in, rules);
    ASSERT_EQ(rows.size(), 6u);
    const int want[] = {6, 5, 6, 5, 5, 0};
    for (std::size_t k = 0; k < 6; ++k) {
        EXPECT_EQ(rows[k].unresolved_gates, want[k]) << rows[k].rule;
        EXPECT_EQ(rows[k].selected_policy, 18) << rows[k].rule;
    }
    for (std::size_t k = 0; k < 5; ++k) {
        EXPECT_EQ(rows[k].action, "direct_launch");
        EXPECT_TRUE(rows[k].overclaim);
    }
    EXPECT_EQ(rows[5].action, "validate_online");
    EXPECT_FALSE(rows[5].overclaim);
}

TEST(Ablation, UnfavorableScoreIsNoAction) {
    const std::vector<ReplayResult> replay = {result(0, 0, 100), result(3, -0.1, 90)};
    GuardrailMatrix guard;
    AblationInputs in;
    in.replay = replay;
    in.guard = &guard;
    const std::vector<AblationRule> rules = {{"replay_only", RuleCriterion::replay_lift, {EvidenceClass::replay}}};
    const auto rows = ablation(in, rules);
    EXPECT_EQ(rows[0].selected_policy, 0);
    EXPECT_EQ(rows[0].action, "no_action");
    EXPECT_FALSE(rows[0].overclaim);
}
