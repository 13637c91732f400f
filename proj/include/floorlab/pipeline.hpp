#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "floorlab/config.hpp"
#include "floorlab/decision.hpp"
#include "floorlab/nuisance.hpp"
#include "floorlab/ope.hpp"
#include "floorlab/sensitivity.hpp"

namespace floorlab {

inline constexpr int kArtifactSchemaVersion = 1;

/// One data window: a panel plus what ingest had to say about it.
struct InputWindow {
    Panel panel;
    std::string source;  // "synthetic", "files" or "none"
    std::vector<QuarantinedRow> quarantined;
    std::size_t rows_read = 0;
    std::vector<std::pair<std::string, std::uint64_t>> checksums;

    double quarantine_share() const {
        return rows_read == 0 ? 0.0 : static_cast<double>(quarantined.size()) / static_cast<double>(rows_read);
    }
};

InputWindow load_discovery(const RunConfig& config);
/// Empty panel with source "none" when no validation window is configured.
InputWindow load_validation(const RunConfig& config);

enum class Stage { replay, ope, full };

struct DecisionArtifact {
    RunConfig config;
    std::string run_id;
    Stage stage = Stage::full;

    PanelSummary discovery_summary;
    std::optional<PanelSummary> validation_summary;
    std::vector<std::pair<std::string, std::uint64_t>> checksums;
    double quarantine_share = 0.0;
    bool measurement_failure = false;

    PolicyCatalog catalog;
    std::vector<ReplayResult> replay;
    std::vector<FrontierRow> frontier;
    GuardrailMatrix guard;
    std::vector<int> survivors;  // after dominance pruning
    std::vector<int> shortlist;  // OPE targets, best first (status quo excluded)
    std::vector<ReplayResult> validation_replay;

    std::optional<CalibrationReport> calibration;
    std::vector<OpeEstimate> ope;
    std::size_t ope_rows = 0;
    std::vector<int> vp_order;

    int selected_policy = -1;   // -1 when nothing is feasible
    int evaluated_policy = -1;  // policy whose evidence fills the gate vector
    GateVector gates;
    Action action = Action::redesign;
    std::string reason;

    std::optional<TransferResult> transfer;
    std::optional<RobustnessSummary> robustness;
    std::vector<SegmentLift> segments;
    std::vector<MdeCurve> mde;
    std::vector<std::string> mde_errors;
    std::vector<AblationRow> ablation;
    std::vector<std::string> warnings;
};

/// Deterministic for a fixed config and inputs, at any thread count.
DecisionArtifact run_pipeline(const RunConfig& config, const InputWindow& discovery, const InputWindow& validation,
                              Stage stage = Stage::full);
DecisionArtifact run_pipeline(const RunConfig& config, Stage stage = Stage::full);

/// Hash of the execution-independent config entries and input checksums.
std::string compute_run_id(const RunConfig& config,
                           const std::vector<std::pair<std::string, std::uint64_t>>& checksums);

std::string artifact_json(const DecisionArtifact& artifact);

/// (file name, CSV text) for every figure-data table the stage produced.
std::vector<std::pair<std::string, std::string>> figure_tables(const DecisionArtifact& artifact);

/// Writes artifact.json, fig_*.csv and quarantine.tsv under dir; returns dir.
std::filesystem::path write_outputs(const DecisionArtifact& artifact, const std::filesystem::path& dir,
                                    const InputWindow& discovery);

}  // namespace floorlab
