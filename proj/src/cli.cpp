#include "floorlab/cli.hpp"

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "floorlab/config.hpp"
#include "floorlab/error.hpp"
#include "floorlab/io.hpp"
#include "floorlab/pipeline.hpp"

namespace floorlab {

namespace {

using Json = nlohmann::ordered_json;

struct Common {
    std::string config_file;
    std::vector<std::string> sets;
    std::size_t threads = 0;
    std::string out;
    std::vector<std::string> discovery, validation;
    std::string schema;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config_file, "Run config file (key = value lines)")->check(CLI::ExistingFile);
    app->add_option("--set", c.sets, "Override a config key: key=value")->take_all();
    app->add_option("--threads", c.threads, "Worker threads");
    app->add_option("--out", c.out, "Output root directory");
    app->add_option("--discovery", c.discovery, "Discovery window log files");
    app->add_option("--validation", c.validation, "Validation window log files");
    app->add_option("--schema", c.schema, "Schema file for the log files");
}

// defaults < FLOORLAB_OUT < config file < flags
RunConfig resolve_config(const Common& c) {
    RunConfig cfg;
    if (const char* env = std::getenv("FLOORLAB_OUT"); env && *env) cfg.output_dir = env;
    if (!c.config_file.empty()) cfg = load_config(c.config_file, cfg);
    for (const auto& kv : c.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (c.threads > 0) cfg.threads = c.threads;
    if (!c.out.empty()) cfg.output_dir = c.out;
    if (!c.discovery.empty()) cfg.discovery = c.discovery;
    if (!c.validation.empty()) cfg.validation = c.validation;
    if (!c.schema.empty()) cfg.schema = c.schema;
    cfg.validate();
    return cfg;
}

std::filesystem::path run_dir(const RunConfig& cfg, const DecisionArtifact& a) {
    return std::filesystem::path(cfg.output_dir) / a.run_id;
}

int run_stage(const Common& common, Stage stage) {
    const RunConfig cfg = resolve_config(common);
    const auto discovery = load_discovery(cfg);
    const auto validation = stage == Stage::full ? load_validation(cfg) : InputWindow{};
    const auto artifact = run_pipeline(cfg, discovery, validation, stage);
    const auto dir = write_outputs(artifact, run_dir(cfg, artifact), discovery);
    Json out{{"run_id", artifact.run_id}, {"output_dir", dir.string()}};
    if (stage == Stage::full) {
        out["selected_policy"] = artifact.selected_policy < 0 ? Json(nullptr) : Json("P" + std::to_string(artifact.selected_policy));
        out["action"] = action_name(artifact.action);
    }
    std::cout << out.dump() << "\n";
    return 0;
}

GateVector parse_gate_bits(const std::string& text) {
    if (text.size() != kGateCount || text.find_first_not_of("01") != std::string::npos)
        throw ConfigError("--gates expects seven 0/1 characters in R,T,S,C,H,B,I order");
    unsigned mask = 0;
    for (std::size_t k = 0; k < kGateCount; ++k)
        if (text[k] == '1') mask |= 1u << k;
    return GateVector::from_bits(mask);
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"Launch-readiness evaluation for reserve/floor policies"};
    app.require_subcommand(1);
    Common common;

    auto* gen = app.add_subcommand("gen", "Write synthetic discovery (and validation) panels");
    add_common(gen, common);
    std::string gen_out, gen_val_out;
    gen->add_option("--panel", gen_out, "Discovery panel file (.tsv or .tsv.gz)")->required();
    gen->add_option("--validation-panel", gen_val_out, "Validation panel file");

    auto* ingest = app.add_subcommand("ingest", "Validate raw logs into a native panel");
    std::vector<std::string> ingest_files;
    std::string ingest_schema, ingest_out, ingest_quarantine;
    std::size_t ingest_threads = 1;
    ingest->add_option("files", ingest_files, "Log files")->required();
    ingest->add_option("--schema", ingest_schema, "Schema file")->check(CLI::ExistingFile);
    ingest->add_option("--panel", ingest_out, "Native panel output")->required();
    ingest->add_option("--quarantine", ingest_quarantine, "Quarantine side file");
    ingest->add_option("--threads", ingest_threads, "Worker threads");

    auto* replay = app.add_subcommand("replay", "Replay the catalog and screen guardrails");
    add_common(replay, common);
    auto* ope = app.add_subcommand("ope", "Replay plus off-policy diagnostics");
    add_common(ope, common);
    auto* all = app.add_subcommand("all", "Run the full evaluation and write the decision artifact");
    add_common(all, common);
    auto* ablate = app.add_subcommand("ablate", "Run the full evaluation and print the rule ablation");
    add_common(ablate, common);

    auto* mde = app.add_subcommand("mde", "Minimum detectable effect curves for the validation designs");
    add_common(mde, common);

    auto* sens = app.add_subcommand("sensitivity", "Response and support stress tests for one policy");
    double s_lift = 0.0, s_median = 0.0, s_p10 = 0.0, s_threshold = 0.15;
    bool s_has_median = false;
    sens->add_option("--lift", s_lift, "Replay lift")->required();
    sens->add_option("--median", s_median, "Median DR lift")->each([&](const std::string&) { s_has_median = true; });
    sens->add_option("--p10", s_p10, "p10 DR lift");
    sens->add_option("--breakeven-threshold", s_threshold, "Break-even gate threshold");

    auto* decide_cmd = app.add_subcommand("decide", "Map a gate vector to an action");
    std::string d_gates, d_artifact, d_attest;
    bool d_measurement = false;
    auto* gates_opt = decide_cmd->add_option("--gates", d_gates, "Seven 0/1 flags in R,T,S,C,H,B,I order");
    auto* art_opt = decide_cmd->add_option("--artifact", d_artifact, "Re-decide from a stored artifact.json")
                        ->check(CLI::ExistingFile);
    gates_opt->excludes(art_opt);
    decide_cmd->add_option("--attest-online", d_attest, "Name of the online experiment backing I = 1");
    decide_cmd->add_flag("--measurement-failure", d_measurement, "Data-quality failure flag");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) {
            const RunConfig cfg = resolve_config(common);
            const auto d = load_discovery(cfg);
            write_panel(d.panel, gen_out);
            Json out{{"discovery", gen_out}, {"rows", d.panel.size()}};
            if (!gen_val_out.empty()) {
                const auto v = load_validation(cfg);
                if (v.panel.empty()) throw ConfigError("no validation window configured");
                write_panel(v.panel, gen_val_out);
                out["validation"] = gen_val_out;
                out["validation_rows"] = v.panel.size();
            }
            std::cout << out.dump() << "\n";
        } else if (ingest->parsed()) {
            const Schema schema = ingest_schema.empty() ? Schema::native() : Schema::load(ingest_schema);
            std::vector<std::filesystem::path> paths(ingest_files.begin(), ingest_files.end());
            const auto result = ingest_logs(paths, schema, "ingest", ingest_threads);
            write_panel(result.panel, ingest_out);
            if (!ingest_quarantine.empty()) write_quarantine(result.quarantined, ingest_quarantine);
            Json out = Json::parse(summary_json(panel_summary(result.panel)));
            out["rows_read"] = result.rows_read;
            out["quarantined"] = result.quarantined.size();
            out["quarantine_share"] = result.quarantine_share();
            std::cout << out.dump() << "\n";
        } else if (replay->parsed()) {
            return run_stage(common, Stage::replay);
        } else if (ope->parsed()) {
            return run_stage(common, Stage::ope);
        } else if (all->parsed()) {
            return run_stage(common, Stage::full);
        } else if (ablate->parsed()) {
            const RunConfig cfg = resolve_config(common);
            const auto artifact = run_pipeline(cfg);
            Json rows = Json::array();
            for (const auto& r : artifact.ablation)
                rows.push_back({{"rule", r.rule}, {"evidence", r.evidence},
                                {"selected_policy", r.selected_policy < 0 ? Json(nullptr) : Json("P" + std::to_string(r.selected_policy))},
                                {"action", r.action}, {"overclaim", r.overclaim}, {"unresolved_gates", r.unresolved_gates}});
            std::cout << rows.dump(2) << "\n";
        } else if (mde->parsed()) {
            const RunConfig cfg = resolve_config(common);
            const auto d = load_discovery(cfg);
            Json out = Json::array();
            for (auto design : all_mde_designs()) {
                try {
                    const auto c = mde_curve(d.panel, design, cfg.mde_durations, cfg.power);
                    Json pts = Json::array();
                    for (const auto& p : c.points) pts.push_back({{"days", p.days}, {"relative", p.relative}, {"absolute", p.absolute}});
                    out.push_back({{"design", mde_design_name(design)}, {"units_per_day", c.units_per_day},
                                   {"sigma", c.sigma}, {"baseline_yield", c.baseline_yield}, {"c", c.c}, {"points", pts}});
                } catch (const DesignError& e) {
                    out.push_back({{"design", mde_design_name(design)}, {"error", e.what()}});
                }
            }
            std::cout << out.dump(2) << "\n";
        } else if (sens->parsed()) {
            SensitivityConfig cfg;
            cfg.breakeven_threshold = s_threshold;
            const double median = s_has_median ? s_median : s_lift;
            const double p10 = sens->count("--p10") ? s_p10 : median;
            const auto r = robustness_summary(0, s_lift, median, p10, cfg);
            Json resp = Json::array(), sup = Json::array(), checks = Json::array();
            for (const auto& [rho, l] : r.response_curve) resp.push_back({rho, l});
            for (const auto& [s, l] : r.support_curve) sup.push_back({s, l});
            for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}});
            std::cout << Json{{"breakeven_rho", r.breakeven_rho}, {"checks_passed", r.checks_passed},
                              {"checks", checks}, {"response_curve", resp}, {"support_curve", sup}}
                             .dump(2)
                      << "\n";
        } else if (decide_cmd->parsed()) {
            GateVector gates;
            std::string stored_action;
            bool measurement = d_measurement;
            if (!d_artifact.empty()) {
                std::string text;
                io::for_each_line(d_artifact, [&](std::string_view l, std::size_t) {
                    text.append(l);
                    text.push_back('\n');
                });
                const auto j = Json::parse(text);
                if (!j.contains("gate_vector")) throw ContractError("artifact has no gate vector");
                unsigned mask = 0;
                for (std::size_t k = 0; k < kGateCount; ++k)
                    if (j["gate_vector"][k]["pass"].get<bool>()) mask |= 1u << k;
                gates = GateVector::from_bits(mask);
                stored_action = j["action"].get<std::string>();
                measurement = measurement || j["inputs"]["measurement_failure"].get<bool>();
                if (gates[Gate::I].pass && j["evidence"]["decision"]["online_attestation"].get<std::string>().empty())
                    gates[Gate::I] = {false, 0.0, 1.0, "logs_only", "I = 1 without attestation ignored"};
            } else if (!d_gates.empty()) {
                gates = parse_gate_bits(d_gates);
            } else {
                throw ConfigError("decide needs --gates or --artifact");
            }
            if (!d_gates.empty()) {
                if (d_attest.empty() && gates[Gate::I].pass)
                    gates[Gate::I] = {false, 0.0, 1.0, "logs_only", "I = 1 without attestation ignored"};
                else if (!d_attest.empty())
                    gates[Gate::I] = {true, 1.0, 1.0, "online_attestation", d_attest};
            }
            const Action action = decide(gates, measurement);
            Json out{{"action", action_name(action)}, {"q_minus_i", gates.q_minus_i()}, {"q", gates.q()},
                     {"I", gates[Gate::I].pass}};
            if (!stored_action.empty()) {
                out["stored_action"] = stored_action;
                out["consistent"] = stored_action == action_name(action);
            }
            std::cout << out.dump() << "\n";
            if (!stored_action.empty() && stored_action != action_name(action)) return 3;
        }
    } catch (const Error& e) {
        std::cerr << Json{{"error", e.kind()}, {"message", e.what()}}.dump() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << Json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
        return 3;
    }
    return 0;
}

}  // namespace floorlab
