#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "floorlab/decision.hpp"
#include "floorlab/guardrails.hpp"
#include "floorlab/nuisance.hpp"
#include "floorlab/ope.hpp"
#include "floorlab/panel.hpp"
#include "floorlab/sensitivity.hpp"
#include "floorlab/synthgen.hpp"

namespace floorlab {

/// Everything a run depends on. Serializes to dotted `key = value` lines;
/// the serialized form round-trips and is embedded in every artifact.
struct RunConfig {
    std::uint64_t seed = 1;  // logger and bootstrap
    std::size_t threads = 1;
    std::size_t shards = 8;
    std::string output_dir = "out";

    // Log input. With no discovery files the run uses the synthetic generator.
    std::vector<std::string> discovery;
    std::vector<std::string> validation;
    std::string schema;  // schema file; empty = native panel format

    GenConfig synth;
    std::size_t synth_validation_rows = 60'000;
    std::int32_t synth_validation_days = 5;
    std::int32_t synth_validation_first_day = 20131019;
    std::uint64_t synth_validation_seed = 2;

    SplitFractions split;
    GuardrailConfig guardrails;
    ModelConfig model;
    LoggerConfig logger;
    OpeConfig ope;
    std::size_t shortlist_size = 6;
    std::size_t ope_max_rows = 200'000;
    std::size_t calibration_bins = 10;
    SensitivityConfig sensitivity;
    int r_max = 3;
    std::string online_attestation;
    double max_quarantine_share = 0.01;
    std::vector<int> mde_durations = {1, 2, 4, 7, 14, 28};
    PowerConfig power;

    /// Throws ConfigError on the first invalid setting.
    void validate() const;
};

/// Sets one dotted key from its text form. Throws ConfigError for unknown
/// keys or unparsable values.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Applies `key = value` lines (`#` comments, blank lines ignored) on top of
/// `base`.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Every key with its current value, in a fixed order.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config);
std::string serialize_config(const RunConfig& config);

}  // namespace floorlab
