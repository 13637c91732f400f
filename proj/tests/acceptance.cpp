// Acceptance run: one PASS/FAIL/SKIP line per criterion, exit 1 on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "floorlab/config.hpp"
#include "floorlab/decision.hpp"
#include "floorlab/error.hpp"
#include "floorlab/ope.hpp"
#include "floorlab/pipeline.hpp"
#include "floorlab/replay.hpp"
#include "floorlab/sensitivity.hpp"
#include "floorlab/stats.hpp"
#include "floorlab/synthgen.hpp"

using namespace floorlab;

namespace {

struct Outcome {
    enum { pass, fail, skip } status = pass;
    std::string detail;
};

class Checker {
public:
    void expect(bool ok, const std::string& what) {
        ++checks_;
        if (!ok && first_failure_.empty()) first_failure_ = what;
    }
    Outcome outcome(const std::string& summary) const {
        if (first_failure_.empty()) return {Outcome::pass, summary + " (" + std::to_string(checks_) + " checks)"};
        return {Outcome::fail, "first failure: " + first_failure_};
    }

private:
    std::size_t checks_ = 0;
    std::string first_failure_;
};

PolicyCatalog catalog_for(const Panel& p) {
    return build_catalog(floor_quantiles(p, FloorPopulation::positive_floors),
                         floor_quantiles(p, FloorPopulation::all_floors));
}

Panel synthetic(std::size_t rows, std::uint64_t seed) {
    GenConfig cfg;
    cfg.n_rows = rows;
    cfg.seed = seed;
    return generate_panel(cfg);
}

std::string fixed(double v, int digits = 4) {
    std::ostringstream s;
    s.precision(digits);
    s << std::fixed << v;
    return s.str();
}

// 1. Engine against the straight-line oracle, 100 panels from 1e4 to 1e6 rows.
Outcome oracle_equivalence() {
    Checker c;
    std::size_t total_rows = 0;
    for (int k = 0; k < 100; ++k) {
        const auto rows = static_cast<std::size_t>(std::llround(std::pow(10.0, 4.0 + 2.0 * k / 99.0)));
        total_rows += rows;
        const auto panel = synthetic(rows, 1000 + static_cast<std::uint64_t>(k));
        const auto catalog = catalog_for(panel);
        const auto base = oracle_replay_value(panel, candidate_floors(catalog.by_id(0), panel, catalog));
        for (const auto& spec : catalog.specs) {
            const auto o = oracle_replay_value(panel, candidate_floors(spec, panel, catalog));
            const auto r = replay_policy(panel, spec, catalog, {8, 4});
            const std::string tag = "panel " + std::to_string(k) + " " + spec.label();
            c.expect(r.value_sum == o.value_sum, tag + " value");
            c.expect(r.retained_impressions == o.retained, tag + " retained");
            c.expect(r.retained_clicks == o.retained_clicks, tag + " clicks");
            c.expect(r.retained_conversions == o.retained_conversions, tag + " conversions");
            c.expect(r.value_per_opportunity == o.value_per_opportunity(), tag + " V_R");
            c.expect(r.lift == exact_ratio(o.value_sum - base.value_sum, base.value_sum), tag + " lift");
        }
    }
    return c.outcome("100 panels, " + std::to_string(total_rows) + " rows, 19 policies each");
}

// 2. Shard counts 1, 4, 17 give identical results.
Outcome shard_invariance() {
    Checker c;
    const auto panel = synthetic(250'000, 77);
    const auto catalog = catalog_for(panel);
    for (const auto& spec : catalog.specs) {
        const auto one = replay_policy(panel, spec, catalog, {1, 1});
        for (std::size_t shards : {4u, 17u}) {
            const auto r = replay_policy(panel, spec, catalog, {shards, 4});
            c.expect(r == one, spec.label() + " with " + std::to_string(shards) + " shards");
        }
    }
    return c.outcome("19 policies x shards {1,4,17}");
}

// 3. Identity policy and monotone retention across the uniform family.
Outcome replay_identities() {
    Checker c;
    for (std::uint64_t seed : {3u, 4u, 5u}) {
        const auto panel = synthetic(100'000, seed);
        const auto catalog = catalog_for(panel);
        const auto p0 = replay_policy(panel, catalog.by_id(0), catalog);
        c.expect(p0.lift == 0.0, "P0 lift");
        c.expect(p0.impression_share == 1.0 && p0.click_share == 1.0 && p0.conversion_share == 1.0 &&
                     p0.value_proxy_share == 1.0,
                 "P0 retention");
        std::int64_t prev = p0.retained_impressions;
        for (int id = 1; id <= 5; ++id) {
            const auto r = replay_policy(panel, catalog.by_id(id), catalog);
            c.expect(r.retained_impressions <= prev, "retention not monotone at P" + std::to_string(id));
            prev = r.retained_impressions;
        }
    }
    return c.outcome("P0 identity, uniform +5%..+30% monotone");
}

// 4. Numbers that follow from closed forms alone.
Outcome closed_forms() {
    Checker c;
    const double rho = breakeven_rho(0.477);
    c.expect(std::abs(rho - 0.3229) <= 5e-4, "break-even " + fixed(rho));
    const double y0 = 953'877'620.0 / 53'289'330.0;
    c.expect(std::abs(y0 - 17.89997) <= 1e-5, "baseline yield " + fixed(y0, 6));
    const auto panel = synthetic(50'000, 9);
    const std::vector<int> days = {1, 2, 4, 7, 8, 28};
    for (auto d : all_mde_designs()) {
        const auto curve = mde_curve(panel, d, days);
        c.expect(curve.points[2].relative == curve.points[0].relative / 2, std::string(mde_design_name(d)) + " T=4");
        c.expect(curve.points[4].relative == curve.points[1].relative / 2, std::string(mde_design_name(d)) + " T=8");
    }
    c.expect(support_adjusted_lower(0.50, 0.458, 1.0) == 0.458, "support curve at s=1");
    return c.outcome("rho*=" + fixed(rho) + ", Y0=" + fixed(y0, 5));
}

// 5. OPE sanity suite.
Outcome ope_suite() {
    Checker c;
    const auto panel = synthetic(20'000, 21);
    const auto catalog = catalog_for(panel);
    const std::vector<PolicySpec> shortlist = {catalog.by_id(0), catalog.by_id(11), catalog.by_id(18)};
    const ReplayRewardModel perfect;

    // On-policy collapse.
    const std::vector<PolicySpec> single = {catalog.by_id(18)};
    const auto on = simulate_logger(panel, single, catalog, {}, 1);
    const std::vector<double> rewards(on.rewards.begin(), on.rewards.end());
    c.expect(estimate_value(on, catalog.by_id(18), perfect, OpeMethod::ipw) == mean(rewards), "on-policy IPW");

    // Perfect model: DR equals DM.
    const auto logged = simulate_logger(panel, shortlist, catalog, {}, 2);
    for (const auto& spec : shortlist) {
        const double dm = estimate_value(logged, spec, perfect, OpeMethod::dm);
        const double dr = estimate_value(logged, spec, perfect, OpeMethod::dr);
        c.expect(dm == dr, spec.label() + " DR vs DM");
    }

    // IPW unbiasedness over 50 logger seeds.
    const auto truth_o = oracle_replay_value(panel, candidate_floors(catalog.by_id(18), panel, catalog));
    const double truth = truth_o.value_per_opportunity();
    std::vector<double> est;
    for (std::uint64_t seed = 1; seed <= 50; ++seed)
        est.push_back(estimate_value(simulate_logger(panel, shortlist, catalog, {}, seed), catalog.by_id(18), perfect,
                                     OpeMethod::ipw));
    const double se = sample_sd(est) / std::sqrt(50.0);
    const double gap = std::abs(mean(est) - truth);
    c.expect(gap <= 3 * se, "IPW mean off by " + fixed(gap / se, 2) + " se");

    // ESS against a straight recomputation.
    const auto support = resolve_target(logged, catalog.by_id(18));
    long double s = 0, s2 = 0;
    for (double w : support.weights) {
        s += w;
        s2 += static_cast<long double>(w) * w;
    }
    const double ess_brute = static_cast<double>(s * s / s2);
    c.expect(std::abs(effective_sample_size(support.weights) - ess_brute) <= 1e-12 * ess_brute, "ESS");

    // Clipped IPW monotone in the cap.
    const std::vector<double> caps = {1, 2, 3, 5, 10, 20, 50, kNoCap};
    const auto sweep = clipping_sweep(logged, catalog.by_id(18), caps, perfect);
    for (std::size_t k = 1; k < sweep.size(); ++k) c.expect(sweep[k].ipw >= sweep[k - 1].ipw, "clip monotone");
    return c.outcome("IPW bias " + fixed(gap / se, 2) + " se over 50 seeds");
}

// 6. Decision map over every gate vector.
Outcome decision_map() {
    Checker c;
    const auto start = std::chrono::steady_clock::now();
    for (unsigned mask = 0; mask < 128; ++mask) {
        const auto g = GateVector::from_bits(mask);
        for (bool flag : {false, true}) {
            const Action a = decide(g, flag);
            const bool q_minus_i = (mask & 0x3F) == 0x3F;
            const bool i = mask & 0x40;
            const bool h = mask & 0x10;
            const Action want = q_minus_i && i ? Action::launch
                                : q_minus_i    ? Action::validate_online
                                : !h || flag   ? Action::redesign
                                               : Action::hold;
            c.expect(a == want, "mask " + std::to_string(mask));
            c.expect(a != Action::launch || i, "launch without I");
        }
    }
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    c.expect(ms < 1000.0, "enumeration took " + fixed(ms, 1) + " ms");
    return c.outcome("128 vectors x 2 flags in " + fixed(ms, 3) + " ms");
}

// 7. Ablation on the bundled synthetic configuration.
Outcome ablation_reproduction() {
    Checker c;
    const auto cfg = load_config(std::string(FLOORLAB_SOURCE_DIR) + "/configs/synthetic.conf");
    const auto art = run_pipeline(cfg);
    const int want[] = {6, 5, 6, 5, 5, 0};
    c.expect(art.ablation.size() == 6, "six rules");
    if (art.ablation.size() == 6) {
        for (std::size_t k = 0; k < 6; ++k) {
            const auto& row = art.ablation[k];
            c.expect(row.unresolved_gates == want[k], row.rule + " unresolved " + std::to_string(row.unresolved_gates));
            c.expect(row.selected_policy == art.ablation[0].selected_policy, row.rule + " selects a different policy");
            c.expect(row.overclaim == (k < 5), row.rule + " overclaim flag");
        }
        c.expect(art.ablation[5].action == "validate_online", "full rule action " + art.ablation[5].action);
    }
    return c.outcome("all rules select P" + std::to_string(art.selected_policy) + ", action " +
                     action_name(art.action));
}

// 8. [p10, p90] coverage of the true lift.
Outcome bootstrap_coverage() {
    int covered = 0;
    const int reps = 50;
    for (int r = 0; r < reps; ++r) {
        const auto panel = synthetic(20'000, 500 + static_cast<std::uint64_t>(r));
        const auto catalog = catalog_for(panel);
        const std::vector<PolicySpec> shortlist = {catalog.by_id(0), catalog.by_id(11), catalog.by_id(18)};
        const auto logged = simulate_logger(panel, shortlist, catalog, {}, 900 + static_cast<std::uint64_t>(r));
        OpeConfig cfg;
        cfg.seed = 1 + static_cast<std::uint64_t>(r);
        cfg.threads = 4;
        const auto res = crossfit_dr(logged, catalog.by_id(18), cfg);
        const double truth = replay_policy(panel, catalog.by_id(18), catalog).lift;
        if (res.lift.p10 <= truth && truth <= res.lift.p90) ++covered;
    }
    const double share = static_cast<double>(covered) / reps;
    Outcome o;
    o.status = share >= 0.70 ? Outcome::pass : Outcome::fail;
    o.detail = std::to_string(covered) + "/" + std::to_string(reps) + " intervals cover the true lift";
    return o;
}

std::vector<std::filesystem::path> env_paths(const char* name) {
    std::vector<std::filesystem::path> out;
    const char* v = std::getenv(name);
    if (!v) return out;
    std::string s = v;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto end = s.find(':', start);
        const auto part = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
        if (!part.empty()) out.emplace_back(part);
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return out;
}

// 9. Reported full-data numbers, when the raw logs are supplied.
Outcome full_data() {
    const auto s2 = env_paths("FLOORLAB_IPINYOU_S2");
    const auto s3 = env_paths("FLOORLAB_IPINYOU_S3");
    const char* schema_path = std::getenv("FLOORLAB_IPINYOU_SCHEMA");
    if (s2.empty() || s3.empty() || !schema_path)
        return {Outcome::skip,
                "set FLOORLAB_IPINYOU_S2, FLOORLAB_IPINYOU_S3 (colon-separated files) and FLOORLAB_IPINYOU_SCHEMA"};
    Checker c;
    const auto schema = Schema::load(schema_path);
    const auto d = ingest_logs(s2, schema, "season2", 8);
    const auto v = ingest_logs(s3, schema, "season3", 8);
    const auto sd = panel_summary(d.panel);
    const auto sv = panel_summary(v.panel);
    c.expect(sd.opportunities == 53'289'330, "season two opportunities " + std::to_string(sd.opportunities));
    c.expect(sd.filled == 12'190'344, "season two filled " + std::to_string(sd.filled));
    c.expect(sd.clicks == 8'729, "season two clicks " + std::to_string(sd.clicks));
    c.expect(sd.conversions == 391, "season two conversions " + std::to_string(sd.conversions));
    c.expect(sv.opportunities == 10'566'743, "season three opportunities " + std::to_string(sv.opportunities));
    c.expect(sv.filled == 3'132'311, "season three filled " + std::to_string(sv.filled));
    c.expect(sv.clicks == 2'691, "season three clicks " + std::to_string(sv.clicks));
    c.expect(sv.conversions == 526, "season three conversions " + std::to_string(sv.conversions));
    c.expect(sd.days == 7 && sv.days == 9, "day counts");
    c.expect(std::abs(sd.fill_rate - 0.229) < 5e-4 && std::abs(sv.fill_rate - 0.296) < 5e-4, "fill rates");
    const auto catalog = catalog_for(d.panel);
    const auto rd = replay_all(d.panel, catalog, {16, 8});
    const auto rv = replay_all(v.panel, catalog, {16, 8});
    const auto& p18d = find_result(rd, 18);
    const auto& p18v = find_result(rv, 18);
    c.expect(std::abs(p18d.lift - 0.477) <= 0.003, "season two P18 lift " + fixed(p18d.lift));
    c.expect(std::abs(p18v.lift - 0.439) <= 0.003, "season three P18 lift " + fixed(p18v.lift));
    c.expect(lift_ranks(rd)[18] == 1, "season two P18 rank");
    c.expect(lift_ranks(rv)[18] == 1, "season three P18 rank");
    return c.outcome("P18 lifts " + fixed(p18d.lift) + " / " + fixed(p18v.lift));
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"oracle equivalence", oracle_equivalence},
        {"shard invariance", shard_invariance},
        {"replay contract identities", replay_identities},
        {"closed-form numbers", closed_forms},
        {"OPE sanity suite", ope_suite},
        {"decision-map enumeration", decision_map},
        {"ablation reproduction", ablation_reproduction},
        {"bootstrap coverage", bootstrap_coverage},
        {"full-data reproduction", full_data},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {Outcome::fail, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const char* tag = o.status == Outcome::pass ? "PASS" : o.status == Outcome::fail ? "FAIL" : "SKIP";
        if (o.status == Outcome::fail) ++failures;
        std::printf("criterion %zu %-28s %s  %s [%.1fs]\n", k + 1, criteria[k].first.c_str(), tag, o.detail.c_str(),
                    secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
