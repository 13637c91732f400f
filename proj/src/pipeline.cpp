#include "floorlab/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "floorlab/error.hpp"
#include "floorlab/io.hpp"
#include "floorlab/rng.hpp"

namespace floorlab {

using Json = nlohmann::ordered_json;

namespace {

InputWindow load_window(const std::vector<std::string>& files, const RunConfig& config, const std::string& window) {
    InputWindow w;
    w.source = "files";
    std::vector<std::filesystem::path> paths(files.begin(), files.end());
    const Schema schema = config.schema.empty() ? Schema::native() : Schema::load(config.schema);
    auto result = ingest_logs(paths, schema, window, config.threads);
    w.panel = result.panel.with_shards(config.shards);
    w.quarantined = std::move(result.quarantined);
    w.rows_read = result.rows_read;
    w.checksums = std::move(result.checksums);
    return w;
}

InputWindow synthetic_window(GenConfig gen, const RunConfig& config) {
    InputWindow w;
    w.source = "synthetic";
    w.panel = generate_panel(gen).with_shards(config.shards);
    w.rows_read = w.panel.size();
    return w;
}

bool is_execution_key(const std::string& key) { return key == "run.threads" || key == "run.output_dir"; }

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf")); }

Json opt(const std::optional<double>& v) { return v ? num(*v) : Json(nullptr); }

}  // namespace

InputWindow load_discovery(const RunConfig& config) {
    if (!config.discovery.empty()) return load_window(config.discovery, config, "discovery");
    GenConfig gen = config.synth;
    gen.window_id = "discovery";
    return synthetic_window(gen, config);
}

InputWindow load_validation(const RunConfig& config) {
    if (!config.validation.empty()) return load_window(config.validation, config, "validation");
    if (!config.discovery.empty() || config.synth_validation_rows == 0) {
        InputWindow w;
        w.source = "none";
        return w;
    }
    GenConfig gen = config.synth;
    gen.window_id = "validation";
    gen.n_rows = config.synth_validation_rows;
    gen.n_days = config.synth_validation_days;
    gen.first_day = config.synth_validation_first_day;
    gen.seed = config.synth_validation_seed;
    return synthetic_window(gen, config);
}

std::string compute_run_id(const RunConfig& config,
                           const std::vector<std::pair<std::string, std::uint64_t>>& checksums) {
    std::string text;
    for (const auto& [k, v] : config_entries(config))
        if (!is_execution_key(k)) text += k + "=" + v + "\n";
    for (const auto& [name, sum] : checksums) text += name + ":" + io::hex64(sum) + "\n";
    return io::hex64(io::fnv1a(text)).substr(0, 12);
}

DecisionArtifact run_pipeline(const RunConfig& config) { return run_pipeline(config, Stage::full); }

DecisionArtifact run_pipeline(const RunConfig& config, Stage stage) {
    const auto discovery = load_discovery(config);
    const auto validation = stage == Stage::full ? load_validation(config) : InputWindow{};
    return run_pipeline(config, discovery, validation, stage);
}

DecisionArtifact run_pipeline(const RunConfig& config, const InputWindow& discovery, const InputWindow& validation,
                              Stage stage) {
    config.validate();
    if (discovery.panel.empty()) throw EmptyPanelError("discovery panel is empty");
    DecisionArtifact a;
    a.config = config;
    a.stage = stage;
    a.checksums = discovery.checksums;
    for (const auto& c : validation.checksums) a.checksums.push_back(c);
    a.run_id = compute_run_id(config, a.checksums);
    a.discovery_summary = panel_summary(discovery.panel);
    if (!validation.panel.empty()) a.validation_summary = panel_summary(validation.panel);
    a.quarantine_share = discovery.quarantine_share();
    a.measurement_failure = a.quarantine_share > config.max_quarantine_share;
    if (a.measurement_failure) a.warnings.push_back("quarantine share above the measurement-failure threshold");

    // Catalog and replay over the whole discovery window.
    a.catalog = build_catalog(floor_quantiles(discovery.panel, FloorPopulation::positive_floors),
                              floor_quantiles(discovery.panel, FloorPopulation::all_floors));
    const ReplayOptions ropt{config.shards, config.threads};
    a.replay = replay_all(discovery.panel, a.catalog, ropt);
    a.guard = screen(a.replay, config.guardrails);
    std::vector<int> passed;
    for (const auto& row : a.guard.rows) passed.push_back(row.passed);
    a.frontier = replay_frontier(a.replay, passed);
    a.survivors = prune_dominated(a.replay, a.guard);

    // OPE targets: surviving raises, guardrail-passing ones first, best lift first.
    std::vector<const ReplayResult*> pool;
    for (const auto& r : a.replay)
        if (r.policy_id != config.logger.status_quo_policy &&
            std::find(a.survivors.begin(), a.survivors.end(), r.policy_id) != a.survivors.end())
            pool.push_back(&r);
    std::stable_sort(pool.begin(), pool.end(), [&](const ReplayResult* x, const ReplayResult* y) {
        const bool px = a.guard.row(x->policy_id).all_pass, py = a.guard.row(y->policy_id).all_pass;
        if (px != py) return px;
        if (x->lift != y->lift) return x->lift > y->lift;
        return x->policy_id < y->policy_id;
    });
    for (std::size_t k = 0; k < pool.size() && k < config.shortlist_size; ++k) a.shortlist.push_back(pool[k]->policy_id);
    if (stage == Stage::replay) return a;

    // Nuisance models on the train slice; logger and OPE on the test slice.
    const auto split = chronological_split(discovery.panel, config.split);
    Panel eval = split.test;
    if (eval.size() > config.ope_max_rows) {
        const CounterRng rng(config.seed, streams::kSubsample);
        const double keep = static_cast<double>(config.ope_max_rows) / static_cast<double>(eval.size());
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < eval.size(); ++i)
            if (rng.uniform(i) < keep) rows.push_back(i);
        eval = eval.select(rows);
    }
    a.ope_rows = eval.size();

    std::vector<PolicySpec> actions{a.catalog.by_id(config.logger.status_quo_policy)};
    for (int id : a.shortlist) actions.push_back(a.catalog.by_id(id));
    std::vector<PolicySpec> targets(actions.begin() + 1, actions.end());

    std::optional<LoggedActionPanel> logged;
    if (!split.train.empty() && !eval.empty()) {
        const auto models = fit_outcome_models(split.train, actions, a.catalog, config.model);
        a.calibration = calibration_report(models, eval, config.calibration_bins);
        for (const auto& c : a.calibration->curves)
            if (!c.warning.empty()) a.warnings.push_back(c.model + " calibration: " + c.warning);
        logged = simulate_logger(eval, actions, a.catalog, config.logger, config.seed);
        if (!targets.empty()) {
            OpeConfig ocfg = config.ope;
            ocfg.seed = config.seed;
            ocfg.threads = config.threads;
            a.ope = evaluate_policies(*logged, targets, models, ocfg);
            for (const auto& e : a.ope)
                for (const auto& w : e.warnings) a.warnings.push_back(w);
        }
    } else {
        a.warnings.push_back("train or test slice empty; OPE skipped");
    }
    a.vp_order = rank_conservative(a.ope, a.guard, config.ope.mode);
    if (stage == Stage::ope) return a;

    // Selection and gates.
    if (!a.vp_order.empty()) {
        a.selected_policy = a.vp_order.front();
        a.evaluated_policy = a.selected_policy;
    } else {
        a.evaluated_policy = pool.empty() ? config.logger.status_quo_policy : pool.front()->policy_id;
        a.reason = "no policy passes every guardrail";
    }

    if (!validation.panel.empty()) {
        try {
            a.validation_replay = replay_all(validation.panel, a.catalog, ropt);
        } catch (const UndefinedLiftError& e) {
            a.warnings.push_back(std::string("validation replay: ") + e.what());
        }
    }

    EvidenceBundle ev;
    ev.policy_id = a.evaluated_policy;
    ev.replay = find_result(a.replay, a.evaluated_policy);
    ev.guardrails = a.guard.row(a.evaluated_policy);
    for (const auto& e : a.ope)
        if (e.policy_id == a.evaluated_policy) ev.ope = e;
    if (validation.panel.empty() || !a.validation_replay.empty())
        a.transfer = transfer_gate(a.replay, a.validation_replay, a.evaluated_policy, config.r_max, config.guardrails);
    ev.transfer = a.transfer;
    if (ev.replay->lift > -1.0) ev.breakeven_rho = breakeven_rho(ev.replay->lift);
    ev.breakeven_threshold = config.sensitivity.breakeven_threshold;
    ev.lower_tail = config.ope.mode;
    ev.online_attestation = config.online_attestation;
    a.gates = evaluate_gates(ev);
    a.action = decide(a.gates, a.measurement_failure);
    if (a.reason.empty()) {
        switch (a.action) {
            case Action::launch: a.reason = "every gate passes, including online evidence"; break;
            case Action::validate_online: a.reason = "offline gates pass; online evidence is missing"; break;
            case Action::redesign:
                a.reason = a.measurement_failure ? "measurement failure" : "guardrails fail";
                break;
            case Action::hold: a.reason = "offline evidence is mixed"; break;
        }
    }

    if (ev.ope) {
        a.robustness = robustness_summary(a.evaluated_policy, ev.replay->lift, ev.ope->boot_median, ev.ope->boot_p10,
                                          config.sensitivity, a.action == Action::launch && !a.gates[Gate::I].pass);
        if (logged) {
            OpeConfig ocfg = config.ope;
            ocfg.seed = config.seed;
            ocfg.threads = config.threads;
            ocfg.boot_B = 1;
            const auto cf = crossfit_dr(*logged, a.catalog.by_id(a.evaluated_policy), ocfg);
            a.segments = segment_heterogeneity(*logged, cf.target_scores, cf.baseline_scores,
                                               config.ope.segment_dimensions, config.ope.min_cell,
                                               config.ope.large_negative_lift);
        }
    }

    for (auto d : all_mde_designs()) {
        try {
            a.mde.push_back(mde_curve(discovery.panel, d, config.mde_durations, config.power));
        } catch (const DesignError& e) {
            a.mde_errors.push_back(e.what());
        }
    }

    AblationInputs in;
    in.replay = a.replay;
    in.guard = &a.guard;
    in.ope = a.ope;
    in.validation = a.validation_replay;
    in.full_selected = a.selected_policy;
    in.full_action = a.action;
    in.online_resolved = a.gates[Gate::I].pass;
    const auto rules = default_ablation_rules();
    a.ablation = ablation(in, rules);
    return a;
}

// ---------------------------------------------------------------------------

namespace {

Json summary_to_json(const PanelSummary& s) {
    return Json{{"days", s.days},          {"opportunities", s.opportunities},
                {"filled", s.filled},      {"fill_rate", num(s.fill_rate)},
                {"clicks", s.clicks},      {"conversions", s.conversions},
                {"baseline_yield_sum", to_string(s.baseline_yield_sum)}};
}

Json spec_json(const PolicySpec& s) {
    return Json{{"id", s.id},       {"label", s.label()},     {"display_name", s.display_name},
                {"family", family_name(s.family)}, {"pct", s.pct}, {"add", s.add},
                {"quantile", quantile_key_name(s.quantile)}, {"gap", s.gap}};
}

Json quantiles_json(const QuantileSet& q) {
    return Json{{"population", population_name(q.population)}, {"q25", q.q25}, {"q50", q.q50}, {"q75", q.q75}};
}

Json replay_json(const ReplayResult& r) {
    Json daily = Json::array();
    for (const auto& d : r.daily)
        daily.push_back({{"day", d.day}, {"lift", opt(d.lift)}, {"retained_share", num(d.retained_share)}});
    return Json{{"policy_id", r.policy_id},
                {"value_sum", to_string(r.value_sum)},
                {"baseline_value_sum", to_string(r.baseline_value_sum)},
                {"opportunities", r.opportunities},
                {"value_per_opportunity", num(r.value_per_opportunity)},
                {"lift", num(r.lift)},
                {"retained_impressions", r.retained_impressions},
                {"baseline_filled", r.baseline_filled},
                {"impression_share", num(r.impression_share)},
                {"click_share", num(r.click_share)},
                {"conversion_share", num(r.conversion_share)},
                {"conversions_vacuous", r.conversions_vacuous},
                {"value_proxy_share", num(r.value_proxy_share)},
                {"changed_share", num(r.changed_share)},
                {"catalog_hash", io::hex64(r.catalog_hash)},
                {"daily", daily}};
}

Json ope_json(const OpeEstimate& e) {
    Json clip = Json::array();
    for (const auto& c : e.clip_sweep) clip.push_back({{"cap", num(c.cap)}, {"ipw", num(c.ipw)}, {"dr", num(c.dr)}});
    return Json{{"policy_id", e.policy_id},   {"n", e.n},
                {"matched", e.matched},       {"v_dm", num(e.v_dm)},
                {"v_ipw", num(e.v_ipw)},      {"v_dr", num(e.v_dr)},
                {"lift_dm", num(e.lift_dm)},  {"lift_ipw", num(e.lift_ipw)},
                {"lift_dr", num(e.lift_dr)},  {"ess", num(e.ess)},
                {"ess_share", num(e.ess_share)}, {"p99_weight", num(e.p99_weight)},
                {"support_pass", e.support_pass}, {"crossfit_lift", num(e.crossfit_lift)},
                {"boot_median", num(e.boot_median)}, {"boot_p10", num(e.boot_p10)},
                {"boot_p90", num(e.boot_p90)}, {"boot_se", num(e.boot_se)},
                {"lower_bound", num(e.lower_bound)}, {"clip_sweep", clip}};
}

Json gates_json(const GateVector& g) {
    Json out = Json::array();
    for (std::size_t k = 0; k < kGateCount; ++k) {
        const auto& e = g.gates[k];
        out.push_back({{"gate", gate_name(static_cast<Gate>(k))},
                       {"pass", e.pass},
                       {"value", num(e.value)},
                       {"threshold", num(e.threshold)},
                       {"source", e.source},
                       {"note", e.note}});
    }
    return out;
}

const char* stage_name(Stage s) {
    switch (s) {
        case Stage::replay: return "replay";
        case Stage::ope: return "ope";
        case Stage::full: return "full";
    }
    return "?";
}

}  // namespace

std::string artifact_json(const DecisionArtifact& a) {
    Json j;
    j["schema_version"] = kArtifactSchemaVersion;
    j["run_id"] = a.run_id;
    j["stage"] = stage_name(a.stage);

    Json cfg = Json::object();
    for (const auto& [k, v] : config_entries(a.config))
        if (!is_execution_key(k)) cfg[k] = v;
    j["config"] = cfg;

    Json sums = Json::array();
    for (const auto& [name, sum] : a.checksums) sums.push_back({{"file", name}, {"fnv1a64", io::hex64(sum)}});
    j["inputs"] = {{"checksums", sums},
                   {"discovery", summary_to_json(a.discovery_summary)},
                   {"validation", a.validation_summary ? summary_to_json(*a.validation_summary) : Json(nullptr)},
                   {"quarantine_share", num(a.quarantine_share)},
                   {"measurement_failure", a.measurement_failure}};

    if (a.stage == Stage::full) {
        j["selected_policy"] = a.selected_policy < 0 ? Json(nullptr) : Json(a.catalog.by_id(a.selected_policy).label());
        j["evaluated_policy"] = a.catalog.by_id(a.evaluated_policy).label();
        j["action"] = action_name(a.action);
        j["reason"] = a.reason;
        j["gate_vector"] = gates_json(a.gates);
        j["q_minus_i"] = a.gates.q_minus_i();
        j["q"] = a.gates.q();
    }

    Json catalog = Json::array();
    for (const auto& s : a.catalog.specs) catalog.push_back(spec_json(s));
    Json ledger;
    ledger["catalog"] = {{"hash", io::hex64(a.catalog.hash())},
                         {"quantiles_positive", quantiles_json(a.catalog.quantiles_positive)},
                         {"quantiles_all", quantiles_json(a.catalog.quantiles_all)},
                         {"policies", catalog}};
    Json replay = Json::array();
    for (const auto& r : a.replay) replay.push_back(replay_json(r));
    ledger["replay"] = replay;

    Json guard = Json::array();
    for (const auto& row : a.guard.rows) {
        Json cells = Json::array();
        for (const auto& c : row.cells)
            cells.push_back({{"guardrail", guardrail_name(c.guardrail)},
                             {"measured", num(c.measured)},
                             {"threshold", num(c.threshold)},
                             {"pass", c.pass},
                             {"note", c.note}});
        guard.push_back({{"policy_id", row.policy_id}, {"passed", row.passed}, {"all_pass", row.all_pass}, {"cells", cells}});
    }
    ledger["guardrails"] = {{"feasible", a.guard.feasible()}, {"matrix", guard}};
    ledger["pruning"] = {{"survivors", a.survivors}, {"shortlist", a.shortlist}};

    if (a.stage != Stage::replay) {
        Json ope = Json::array();
        for (const auto& e : a.ope) ope.push_back(ope_json(e));
        ledger["ope"] = {{"rows", a.ope_rows},
                         {"mode", lower_tail_mode_name(a.config.ope.mode)},
                         {"min_ess_share", num(a.config.ope.min_ess_share)},
                         {"max_p99_weight", num(a.config.ope.max_p99_weight)},
                         {"alpha", num(a.config.ope.alpha)},
                         {"vp_order", a.vp_order},
                         {"estimates", ope}};
        if (a.calibration) {
            Json cal = Json::array();
            for (const auto& c : a.calibration->curves)
                cal.push_back({{"model", c.model}, {"max_gap", num(c.max_gap)}, {"bins", c.bins.size()}, {"warning", c.warning}});
            ledger["calibration"] = cal;
        }
    }

    if (a.stage == Stage::full) {
        if (a.transfer) {
            const auto& t = *a.transfer;
            ledger["transfer"] = {{"available", t.available},
                                  {"pass", t.pass},
                                  {"validation_lift", num(t.validation_lift)},
                                  {"validation_rank", t.validation_rank},
                                  {"r_max", a.config.r_max},
                                  {"impression_share", num(t.impression_share)},
                                  {"click_share", num(t.click_share)},
                                  {"conversion_share", num(t.conversion_share)},
                                  {"value_proxy_share", num(t.value_proxy_share)},
                                  {"note", t.note}};
        }
        if (a.robustness) {
            const auto& r = *a.robustness;
            Json checks = Json::array();
            for (const auto& c : r.checks)
                checks.push_back({{"name", c.name}, {"pass", c.pass}, {"value", num(c.value)}, {"threshold", num(c.threshold)}});
            ledger["sensitivity"] = {{"replay_lift", num(r.replay_lift)},
                                     {"median_dr_lift", num(r.median_dr_lift)},
                                     {"p10_dr_lift", num(r.p10_dr_lift)},
                                     {"breakeven_rho", num(r.breakeven_rho)},
                                     {"breakeven_threshold", num(a.config.sensitivity.breakeven_threshold)},
                                     {"checks_passed", r.checks_passed},
                                     {"checks", checks}};
        }
        Json seg = Json::array();
        for (const auto& s : a.segments)
            seg.push_back({{"dimension", s.dimension}, {"value", s.value}, {"n_rows", s.n_rows},
                           {"dr_lift", opt(s.dr_lift)}, {"flag_large_negative", s.flag_large_negative}});
        ledger["segments"] = seg;

        Json mde = Json::array();
        for (const auto& m : a.mde) {
            Json pts = Json::array();
            for (const auto& p : m.points)
                pts.push_back({{"days", p.days}, {"relative", num(p.relative)}, {"absolute", num(p.absolute)}});
            mde.push_back({{"design", mde_design_name(m.design)}, {"units", m.units},
                           {"units_per_day", num(m.units_per_day)}, {"sigma", num(m.sigma)},
                           {"baseline_yield", num(m.baseline_yield)}, {"c", num(m.c)}, {"points", pts}});
        }
        ledger["mde"] = {{"alpha", num(a.config.power.alpha)}, {"power", num(a.config.power.power)},
                         {"designs", mde}, {"errors", a.mde_errors}};
        ledger["decision"] = {{"max_quarantine_share", num(a.config.max_quarantine_share)},
                              {"online_attestation", a.config.online_attestation}};

        Json abl = Json::array();
        for (const auto& r : a.ablation)
            abl.push_back({{"rule", r.rule}, {"evidence", r.evidence},
                           {"selected_policy", r.selected_policy < 0 ? Json(nullptr) : Json(r.selected_policy)},
                           {"criterion", num(r.criterion_value)}, {"action", r.action},
                           {"overclaim", r.overclaim}, {"unresolved_gates", r.unresolved_gates}});
        j["ablation"] = abl;
    }
    j["evidence"] = ledger;
    j["warnings"] = a.warnings;
    return j.dump(2) + "\n";
}

std::vector<std::pair<std::string, std::string>> figure_tables(const DecisionArtifact& a) {
    std::vector<std::pair<std::string, std::string>> out;

    io::CsvTable frontier({"policy", "display_name", "changed_share", "lift", "guardrails_passed"});
    for (const auto& r : a.frontier)
        frontier.row().cell("P" + std::to_string(r.policy_id)).cell(r.display_name).cell(r.changed_share).cell(r.lift).cell(
            r.guardrails_passed);
    out.emplace_back("fig_frontier.csv", frontier.str());

    io::CsvTable daily({"policy", "day", "lift", "retained_share"});
    for (const auto& r : a.replay)
        for (const auto& d : r.daily) {
            daily.row().cell("P" + std::to_string(r.policy_id)).cell(static_cast<std::int64_t>(d.day));
            if (d.lift) daily.cell(*d.lift);
            else daily.cell(std::string_view{});
            daily.cell(d.retained_share);
        }
    out.emplace_back("fig_daily.csv", daily.str());

    io::CsvTable guard({"policy", "guardrail", "measured", "threshold", "pass", "note"});
    for (const auto& row : a.guard.rows)
        for (const auto& c : row.cells)
            guard.row().cell("P" + std::to_string(row.policy_id)).cell(guardrail_name(c.guardrail)).cell(c.measured)
                .cell(c.threshold).cell(c.pass).cell(c.note);
    out.emplace_back("fig_guardrails.csv", guard.str());
    if (a.stage == Stage::replay) return out;

    if (a.calibration) {
        io::CsvTable cal({"model", "bin", "mean_prediction", "mean_outcome", "count"});
        for (const auto& c : a.calibration->curves)
            for (std::size_t b = 0; b < c.bins.size(); ++b)
                cal.row().cell(c.model).cell(b).cell(c.bins[b].mean_prediction).cell(c.bins[b].mean_outcome).cell(
                    c.bins[b].count);
        out.emplace_back("fig_calibration.csv", cal.str());
    }

    io::CsvTable est({"policy", "replay_lift", "lift_dm", "lift_ipw", "lift_dr", "crossfit_lift", "boot_median",
                      "boot_p10", "boot_p90", "lower_bound"});
    io::CsvTable weights({"policy", "matched", "ess", "ess_share", "p99_weight", "support_pass"});
    io::CsvTable clip({"policy", "cap", "ipw", "dr"});
    for (const auto& e : a.ope) {
        const std::string p = "P" + std::to_string(e.policy_id);
        est.row().cell(p).cell(find_result(a.replay, e.policy_id).lift).cell(e.lift_dm).cell(e.lift_ipw).cell(e.lift_dr)
            .cell(e.crossfit_lift).cell(e.boot_median).cell(e.boot_p10).cell(e.boot_p90).cell(e.lower_bound);
        weights.row().cell(p).cell(e.matched).cell(e.ess).cell(e.ess_share).cell(e.p99_weight).cell(e.support_pass);
        for (const auto& c : e.clip_sweep) clip.row().cell(p).cell(c.cap).cell(c.ipw).cell(c.dr);
    }
    out.emplace_back("fig_estimators.csv", est.str());
    out.emplace_back("fig_weights.csv", weights.str());
    out.emplace_back("fig_clipping.csv", clip.str());
    if (a.stage == Stage::ope) return out;

    io::CsvTable seg({"dimension", "value", "n_rows", "dr_lift", "flag_large_negative"});
    for (const auto& s : a.segments) {
        seg.row().cell(s.dimension).cell(s.value).cell(s.n_rows);
        if (s.dr_lift) seg.cell(*s.dr_lift);
        else seg.cell(std::string_view{});
        seg.cell(s.flag_large_negative);
    }
    out.emplace_back("fig_segments.csv", seg.str());

    if (a.robustness) {
        io::CsvTable resp({"rho", "adjusted_lift"});
        for (const auto& [rho, l] : a.robustness->response_curve) resp.row().cell(rho).cell(l);
        out.emplace_back("fig_response.csv", resp.str());
        io::CsvTable sup({"support_scale", "adjusted_lower_tail"});
        for (const auto& [s, l] : a.robustness->support_curve) sup.row().cell(s).cell(l);
        out.emplace_back("fig_support.csv", sup.str());
    }

    io::CsvTable transfer({"policy", "discovery_lift", "discovery_rank", "validation_lift", "validation_rank"});
    const auto dranks = lift_ranks(a.replay);
    const auto vranks = lift_ranks(a.validation_replay);
    for (std::size_t i = 0; i < a.replay.size(); ++i) {
        transfer.row().cell("P" + std::to_string(a.replay[i].policy_id)).cell(a.replay[i].lift).cell(dranks[i]);
        if (i < a.validation_replay.size()) transfer.cell(a.validation_replay[i].lift).cell(vranks[i]);
        else transfer.cell(std::string_view{}).cell(std::string_view{});
    }
    out.emplace_back("fig_transfer.csv", transfer.str());

    io::CsvTable mde({"design", "units_per_day", "sigma", "c", "days", "relative_mde", "absolute_mde"});
    for (const auto& m : a.mde)
        for (const auto& p : m.points)
            mde.row().cell(mde_design_name(m.design)).cell(m.units_per_day).cell(m.sigma).cell(m.c).cell(p.days)
                .cell(p.relative).cell(p.absolute);
    out.emplace_back("fig_mde.csv", mde.str());

    io::CsvTable gates({"gate", "pass", "value", "threshold", "source", "note"});
    for (std::size_t k = 0; k < kGateCount; ++k) {
        const auto& g = a.gates.gates[k];
        gates.row().cell(gate_name(static_cast<Gate>(k))).cell(g.pass).cell(g.value).cell(g.threshold).cell(g.source)
            .cell(g.note);
    }
    out.emplace_back("fig_gates.csv", gates.str());

    io::CsvTable abl({"rule", "evidence", "selected_policy", "criterion", "action", "overclaim", "unresolved_gates"});
    for (const auto& r : a.ablation) {
        abl.row().cell(r.rule).cell(r.evidence);
        if (r.selected_policy >= 0) abl.cell("P" + std::to_string(r.selected_policy));
        else abl.cell(std::string_view{});
        abl.cell(r.criterion_value).cell(r.action).cell(r.overclaim).cell(r.unresolved_gates);
    }
    out.emplace_back("fig_ablation.csv", abl.str());
    return out;
}

std::filesystem::path write_outputs(const DecisionArtifact& a, const std::filesystem::path& dir,
                                    const InputWindow& discovery) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    for (const auto& [name, text] : figure_tables(a)) io::write_file_atomic(dir / name, text);
    write_quarantine(discovery.quarantined, dir / "quarantine.tsv");
    io::write_file_atomic(dir / "artifact.json", artifact_json(a));
    return dir;
}

}  // namespace floorlab
