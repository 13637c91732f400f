#include "floorlab/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

#include "floorlab/error.hpp"
#include "floorlab/io.hpp"

namespace floorlab {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T v{};
    const auto t = trim(text);
    if (std::is_floating_point_v<T> && (t == "inf" || t == "infinity")) return static_cast<T>(kNoCap);
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty())
        throw ConfigError("bad value for " + key + ": '" + text + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    const auto t = trim(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError("bad boolean for " + key + ": '" + text + "'");
}

std::vector<std::string> parse_list(const std::string& text) {
    std::vector<std::string> out;
    for (auto part : io::split(text, ',')) {
        auto t = trim(part);
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

std::string fmt(double v) { return std::isinf(v) ? "inf" : io::format_double(v); }

template <typename T>
std::string join(const std::vector<T>& xs, const std::function<std::string(const T&)>& f) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + f(xs[i]);
    return s;
}

struct Field {
    const char* key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

#define NUM_FIELD(name, member, type)                                                        \
    Field {                                                                                  \
        name, [](const RunConfig& c) { return num_text(c.member); },                         \
            [](RunConfig& c, const std::string& v) { c.member = parse_number<type>(name, v); } \
    }

template <typename T>
std::string num_text(T v) {
    if constexpr (std::is_floating_point_v<T>) return fmt(v);
    else return std::to_string(v);
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        NUM_FIELD("run.seed", seed, std::uint64_t),
        NUM_FIELD("run.threads", threads, std::size_t),
        NUM_FIELD("run.shards", shards, std::size_t),
        {"run.output_dir", [](const RunConfig& c) { return c.output_dir; },
         [](RunConfig& c, const std::string& v) { c.output_dir = trim(v); }},

        {"data.discovery", [](const RunConfig& c) { return join<std::string>(c.discovery, [](auto& s) { return s; }); },
         [](RunConfig& c, const std::string& v) { c.discovery = parse_list(v); }},
        {"data.validation",
         [](const RunConfig& c) { return join<std::string>(c.validation, [](auto& s) { return s; }); },
         [](RunConfig& c, const std::string& v) { c.validation = parse_list(v); }},
        {"data.schema", [](const RunConfig& c) { return c.schema; },
         [](RunConfig& c, const std::string& v) { c.schema = trim(v); }},

        NUM_FIELD("synth.rows", synth.n_rows, std::size_t),
        NUM_FIELD("synth.days", synth.n_days, std::int32_t),
        NUM_FIELD("synth.first_day", synth.first_day, std::int32_t),
        NUM_FIELD("synth.seed", synth.seed, std::uint64_t),
        NUM_FIELD("synth.bid_log_mean", synth.bid_log_mean, double),
        NUM_FIELD("synth.bid_log_sd", synth.bid_log_sd, double),
        {"synth.bid_log_shift_by_region",
         [](const RunConfig& c) { return join<double>(c.synth.bid_log_shift_by_region, fmt); },
         [](RunConfig& c, const std::string& v) {
             c.synth.bid_log_shift_by_region.clear();
             for (const auto& s : parse_list(v))
                 c.synth.bid_log_shift_by_region.push_back(parse_number<double>("synth.bid_log_shift_by_region", s));
         }},
        NUM_FIELD("synth.zero_floor_prob", synth.zero_floor_prob, double),
        NUM_FIELD("synth.floor_log_mean", synth.floor_log_mean, double),
        NUM_FIELD("synth.floor_log_sd", synth.floor_log_sd, double),
        NUM_FIELD("synth.demand_prob", synth.demand_prob, double),
        {"synth.demand_prob_by_exchange",
         [](const RunConfig& c) { return join<double>(c.synth.demand_prob_by_exchange, fmt); },
         [](RunConfig& c, const std::string& v) {
             c.synth.demand_prob_by_exchange.clear();
             for (const auto& s : parse_list(v))
                 c.synth.demand_prob_by_exchange.push_back(parse_number<double>("synth.demand_prob_by_exchange", s));
         }},
        NUM_FIELD("synth.pay_share_lo_pct", synth.pay_share_lo_pct, std::int32_t),
        NUM_FIELD("synth.pay_share_hi_pct", synth.pay_share_hi_pct, std::int32_t),
        NUM_FIELD("synth.click_rate", synth.click_rate, double),
        NUM_FIELD("synth.conversion_rate", synth.conversion_rate, double),
        NUM_FIELD("synth.exchanges", synth.n_exchanges, std::int32_t),
        NUM_FIELD("synth.regions", synth.n_regions, std::int32_t),
        NUM_FIELD("synth.advertisers", synth.n_advertisers, std::int32_t),
        NUM_FIELD("synth.slots", synth.n_slots, std::int32_t),
        NUM_FIELD("synth.devices", synth.n_devices, std::int32_t),
        NUM_FIELD("synth.validation_rows", synth_validation_rows, std::size_t),
        NUM_FIELD("synth.validation_days", synth_validation_days, std::int32_t),
        NUM_FIELD("synth.validation_first_day", synth_validation_first_day, std::int32_t),
        NUM_FIELD("synth.validation_seed", synth_validation_seed, std::uint64_t),

        NUM_FIELD("split.train", split.train, double),
        NUM_FIELD("split.val", split.val, double),
        NUM_FIELD("split.test", split.test, double),

        NUM_FIELD("guardrails.min_yield_lift", guardrails.min_yield_lift, double),
        NUM_FIELD("guardrails.min_impression_retention", guardrails.min_impression_retention, double),
        NUM_FIELD("guardrails.min_daily_impression_retention", guardrails.min_daily_impression_retention, double),
        NUM_FIELD("guardrails.min_click_retention", guardrails.min_click_retention, double),
        NUM_FIELD("guardrails.min_conversion_retention", guardrails.min_conversion_retention, double),
        NUM_FIELD("guardrails.min_value_retention", guardrails.min_value_retention, double),
        {"guardrails.require_daily_positive_lift",
         [](const RunConfig& c) { return std::string(c.guardrails.require_daily_positive_lift ? "true" : "false"); },
         [](RunConfig& c, const std::string& v) {
             c.guardrails.require_daily_positive_lift = parse_bool("guardrails.require_daily_positive_lift", v);
         }},

        {"model.features",
         [](const RunConfig& c) {
             return join<ContextKey>(c.model.features, [](const ContextKey& k) { return std::string(context_key_name(k)); });
         },
         [](RunConfig& c, const std::string& v) {
             c.model.features.clear();
             for (const auto& s : parse_list(v)) c.model.features.push_back(parse_context_key(s));
         }},
        NUM_FIELD("model.smoothing", model.smoothing, double),

        NUM_FIELD("logger.epsilon", logger.epsilon, double),
        NUM_FIELD("logger.status_quo_tilt", logger.status_quo_tilt, double),
        NUM_FIELD("logger.min_propensity", logger.min_propensity, double),
        NUM_FIELD("logger.floor_tolerance", logger.floor_tolerance, Money),

        NUM_FIELD("ope.k_folds", ope.k_folds, std::size_t),
        NUM_FIELD("ope.boot_B", ope.boot_B, std::size_t),
        NUM_FIELD("ope.alpha", ope.alpha, double),
        {"ope.mode", [](const RunConfig& c) { return std::string(lower_tail_mode_name(c.ope.mode)); },
         [](RunConfig& c, const std::string& v) { c.ope.mode = parse_lower_tail_mode(trim(v)); }},
        {"ope.caps", [](const RunConfig& c) { return join<double>(c.ope.caps, fmt); },
         [](RunConfig& c, const std::string& v) {
             c.ope.caps.clear();
             for (const auto& s : parse_list(v)) c.ope.caps.push_back(parse_number<double>("ope.caps", s));
         }},
        NUM_FIELD("ope.min_ess_share", ope.min_ess_share, double),
        NUM_FIELD("ope.max_p99_weight", ope.max_p99_weight, double),
        NUM_FIELD("ope.min_cell", ope.min_cell, std::size_t),
        NUM_FIELD("ope.large_negative_lift", ope.large_negative_lift, double),
        {"ope.segment_dimensions",
         [](const RunConfig& c) {
             return join<ContextKey>(c.ope.segment_dimensions,
                                     [](const ContextKey& k) { return std::string(context_key_name(k)); });
         },
         [](RunConfig& c, const std::string& v) {
             c.ope.segment_dimensions.clear();
             for (const auto& s : parse_list(v)) c.ope.segment_dimensions.push_back(parse_context_key(s));
         }},
        NUM_FIELD("ope.shortlist_size", shortlist_size, std::size_t),
        NUM_FIELD("ope.max_rows", ope_max_rows, std::size_t),
        NUM_FIELD("calibration.bins", calibration_bins, std::size_t),

        NUM_FIELD("sensitivity.breakeven_threshold", sensitivity.breakeven_threshold, double),
        NUM_FIELD("sensitivity.rho_max", sensitivity.rho_max, double),
        NUM_FIELD("sensitivity.rho_points", sensitivity.rho_points, int),
        {"sensitivity.support_scales", [](const RunConfig& c) { return join<double>(c.sensitivity.support_scales, fmt); },
         [](RunConfig& c, const std::string& v) {
             c.sensitivity.support_scales.clear();
             for (const auto& s : parse_list(v))
                 c.sensitivity.support_scales.push_back(parse_number<double>("sensitivity.support_scales", s));
         }},

        NUM_FIELD("decision.r_max", r_max, int),
        {"decision.online_attestation", [](const RunConfig& c) { return c.online_attestation; },
         [](RunConfig& c, const std::string& v) { c.online_attestation = trim(v); }},
        NUM_FIELD("decision.max_quarantine_share", max_quarantine_share, double),
        {"decision.mde_durations",
         [](const RunConfig& c) { return join<int>(c.mde_durations, [](const int& d) { return std::to_string(d); }); },
         [](RunConfig& c, const std::string& v) {
             c.mde_durations.clear();
             for (const auto& s : parse_list(v)) c.mde_durations.push_back(parse_number<int>("decision.mde_durations", s));
         }},
        NUM_FIELD("power.alpha", power.alpha, double),
        NUM_FIELD("power.power", power.power, double),
    };
    return table;
}

#undef NUM_FIELD

}  // namespace

void RunConfig::validate() const {
    if (threads < 1) throw ConfigError("run.threads must be >= 1");
    if (shards < 1) throw ConfigError("run.shards must be >= 1");
    if (output_dir.empty()) throw ConfigError("run.output_dir is empty");
    if (discovery.empty()) synth.validate();
    if (split.train < 0 || split.val < 0 || split.test < 0 ||
        std::abs(split.train + split.val + split.test - 1.0) > 1e-9)
        throw ConfigError("split fractions must be non-negative and sum to 1");
    guardrails.validate();
    model.validate();
    logger.validate();
    ope.validate();
    if (shortlist_size < 1) throw ConfigError("ope.shortlist_size must be >= 1");
    if (ope_max_rows < 1) throw ConfigError("ope.max_rows must be >= 1");
    if (calibration_bins < 1) throw ConfigError("calibration.bins must be >= 1");
    sensitivity.validate();
    if (r_max < 1) throw ConfigError("decision.r_max must be >= 1");
    if (!(max_quarantine_share >= 0.0 && max_quarantine_share <= 1.0))
        throw ConfigError("decision.max_quarantine_share must be in [0, 1]");
    if (mde_durations.empty()) throw ConfigError("decision.mde_durations is empty");
    for (int d : mde_durations)
        if (d < 1) throw ConfigError("decision.mde_durations must be positive");
    if (!(power.alpha > 0.0 && power.alpha < 1.0) || !(power.power > 0.0 && power.power < 1.0))
        throw ConfigError("power parameters must be in (0, 1)");
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
    for (const auto& f : fields()) {
        if (key == f.key) {
            f.set(config, value);
            return;
        }
    }
    throw ConfigError("unknown config key '" + key + "'");
}

RunConfig parse_config(const std::string& text, RunConfig base) {
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const auto t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
        set_config_value(base, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
    std::string text;
    io::for_each_line(path, [&](std::string_view line, std::size_t) {
        text.append(line);
        text.push_back('\n');
    });
    return parse_config(text, std::move(base));
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& f : fields()) out.emplace_back(f.key, f.get(config));
    return out;
}

std::string serialize_config(const RunConfig& config) {
    std::string s;
    for (const auto& [k, v] : config_entries(config)) s += k + " = " + v + "\n";
    return s;
}

}  // namespace floorlab
