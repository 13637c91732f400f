#include "floorlab/decision.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "floorlab/error.hpp"
#include "floorlab/stats.hpp"

namespace floorlab {

const char* action_name(Action a) {
    switch (a) {
        case Action::launch: return "launch";
        case Action::validate_online: return "validate_online";
        case Action::hold: return "hold";
        case Action::redesign: return "redesign";
    }
    return "?";
}

Action parse_action(const std::string& name) {
    for (auto a : {Action::launch, Action::validate_online, Action::hold, Action::redesign})
        if (name == action_name(a)) return a;
    throw ConfigError("unknown action '" + name + "'");
}

const char* gate_name(Gate g) {
    static constexpr const char* names[] = {"R", "T", "S", "C", "H", "B", "I"};
    return names[static_cast<std::size_t>(g)];
}

bool GateVector::q_minus_i() const {
    for (std::size_t k = 0; k + 1 < kGateCount; ++k)
        if (!gates[k].pass) return false;
    return true;
}

bool GateVector::q() const { return q_minus_i() && (*this)[Gate::I].pass; }

GateVector GateVector::from_bits(unsigned mask) {
    GateVector v;
    for (std::size_t k = 0; k < kGateCount; ++k) {
        v.gates[k].pass = (mask >> k) & 1u;
        v.gates[k].value = v.gates[k].pass ? 1.0 : 0.0;
        v.gates[k].source = "given";
    }
    return v;
}

unsigned GateVector::bits() const {
    unsigned m = 0;
    for (std::size_t k = 0; k < kGateCount; ++k)
        if (gates[k].pass) m |= 1u << k;
    return m;
}

Action decide(const GateVector& gates, bool measurement_failure) {
    if (gates.q()) return Action::launch;
    if (gates.q_minus_i()) return Action::validate_online;
    if (!gates[Gate::H].pass || measurement_failure) return Action::redesign;
    return Action::hold;
}

TransferResult transfer_gate(std::span<const ReplayResult> discovery, std::span<const ReplayResult> validation,
                             int policy_id, int r_max, const GuardrailConfig& thresholds) {
    TransferResult t;
    if (validation.empty()) {
        t.available = false;
        t.pass = true;
        t.note = "validation window unavailable; non-blocking placeholder";
        return t;
    }
    const auto& disc = find_result(discovery, policy_id);
    const auto it = std::find_if(validation.begin(), validation.end(),
                                 [&](const ReplayResult& r) { return r.policy_id == policy_id; });
    if (it == validation.end()) throw ContractError("no validation replay for P" + std::to_string(policy_id));
    if (it->catalog_hash != disc.catalog_hash)
        throw ContractError("validation replay used a different catalog than discovery; policies were not frozen");
    const auto ranks = lift_ranks(validation);
    const auto& v = *it;
    t.available = true;
    t.validation_lift = v.lift;
    t.validation_rank = ranks[static_cast<std::size_t>(it - validation.begin())];
    t.impression_share = v.impression_share;
    t.click_share = v.click_share;
    t.conversion_share = v.conversion_share;
    t.value_proxy_share = v.value_proxy_share;
    const bool lift_ok = v.lift > 0.0;
    const bool rank_ok = t.validation_rank <= r_max;
    const bool retention_ok = v.impression_share >= thresholds.min_impression_retention &&
                              v.click_share >= thresholds.min_click_retention &&
                              v.conversion_share >= thresholds.min_conversion_retention &&
                              v.value_proxy_share >= thresholds.min_value_retention;
    t.pass = lift_ok && rank_ok && retention_ok;
    if (!lift_ok) t.note = "validation lift not positive";
    else if (!rank_ok) t.note = "validation rank " + std::to_string(t.validation_rank) + " above " + std::to_string(r_max);
    else if (!retention_ok) t.note = "validation retention below threshold";
    return t;
}

namespace {

GateEvidence missing(const std::string& what) {
    GateEvidence g;
    g.source = "missing";
    g.note = what + " evidence missing";
    return g;
}

}  // namespace

GateVector evaluate_gates(const EvidenceBundle& e) {
    GateVector v;
    if (e.replay) v[Gate::R] = {e.replay->lift > 0.0, e.replay->lift, 0.0, "replay", ""};
    else v[Gate::R] = missing("replay");

    if (e.transfer) {
        const auto& t = *e.transfer;
        v[Gate::T] = {t.pass, t.available ? t.validation_lift : 0.0, 0.0, t.available ? "validation_replay" : "placeholder",
                      t.note};
    } else {
        v[Gate::T] = missing("transfer");
    }

    if (e.ope) {
        const auto& o = *e.ope;
        v[Gate::S] = {o.support_pass, o.ess_share, 0.0, "ope_weights",
                      "ess_share and p99 weight against the support thresholds"};
        const double score = lower_tail_score(o, e.lower_tail);
        v[Gate::C] = {score > 0.0, score, 0.0, std::string("ope_") + lower_tail_mode_name(e.lower_tail), ""};
    } else {
        v[Gate::S] = missing("support");
        v[Gate::C] = missing("lower-tail");
    }

    if (e.guardrails)
        v[Gate::H] = {e.guardrails->all_pass, static_cast<double>(e.guardrails->passed),
                      static_cast<double>(kGuardrailCount), "guardrails", ""};
    else v[Gate::H] = missing("guardrail");

    if (e.breakeven_rho)
        v[Gate::B] = {*e.breakeven_rho >= e.breakeven_threshold, *e.breakeven_rho, e.breakeven_threshold,
                      "sensitivity", ""};
    else v[Gate::B] = missing("break-even");

    if (!e.online_attestation.empty())
        v[Gate::I] = {true, 1.0, 1.0, "online_attestation", e.online_attestation};
    else v[Gate::I] = {false, 0.0, 1.0, "logs_only", "no online experiment attested"};
    return v;
}

std::vector<int> prune_dominated(std::span<const ReplayResult> results, const GuardrailMatrix& guard) {
    struct Point {
        int id;
        double lift, imp;
        int passed;
    };
    std::vector<Point> pts;
    for (const auto& r : results) pts.push_back({r.policy_id, r.lift, r.impression_share, guard.row(r.policy_id).passed});
    std::vector<int> keep;
    for (const auto& a : pts) {
        const bool dominated = std::any_of(pts.begin(), pts.end(), [&](const Point& b) {
            const bool weakly = b.lift >= a.lift && b.imp >= a.imp && b.passed >= a.passed;
            const bool strictly = b.lift > a.lift || b.imp > a.imp || b.passed > a.passed;
            return weakly && strictly;
        });
        if (!dominated) keep.push_back(a.id);
    }
    return keep;
}

// ---------------------------------------------------------------------------

const char* mde_design_name(MdeDesign d) {
    switch (d) {
        case MdeDesign::advertiser: return "advertiser";
        case MdeDesign::exchange_hour: return "exchange_hour";
        case MdeDesign::exchange_region: return "exchange_region";
        case MdeDesign::region_day: return "region_day";
    }
    return "?";
}

namespace {
constexpr std::array<MdeDesign, 4> kDesigns = {MdeDesign::advertiser, MdeDesign::exchange_hour,
                                               MdeDesign::exchange_region, MdeDesign::region_day};
}

std::span<const MdeDesign> all_mde_designs() { return kDesigns; }

MdeDesign parse_mde_design(const std::string& name) {
    for (auto d : kDesigns)
        if (name == mde_design_name(d)) return d;
    throw ConfigError("unknown validation design '" + name + "'");
}

MdeCurve mde_curve(const Panel& panel, MdeDesign design, std::span<const int> durations, const PowerConfig& power) {
    if (panel.empty()) throw EmptyPanelError("validation design needs a non-empty panel");
    if (!(power.alpha > 0.0 && power.alpha < 1.0) || !(power.power > 0.0 && power.power < 1.0))
        throw ConfigError("power parameters must be in (0, 1)");
    for (int t : durations)
        if (t <= 0) throw ConfigError("durations must be positive day counts");

    // One-day assignment cells: (day, a, b, c) with unused slots zero.
    using Key = std::tuple<std::int32_t, std::int32_t, std::int32_t, std::int32_t>;
    struct Cell {
        MoneySum pay = 0;
        std::int64_t n = 0;
    };
    std::map<Key, Cell> cells;
    MoneySum total_pay = 0;
    for (std::size_t i = 0; i < panel.size(); ++i) {
        Key k;
        const auto day = panel.days()[i];
        switch (design) {
            case MdeDesign::advertiser: k = {day, panel.advertisers()[i], 0, 0}; break;
            case MdeDesign::exchange_hour: k = {day, panel.exchanges()[i], panel.hours()[i], 0}; break;
            case MdeDesign::exchange_region: k = {day, panel.exchanges()[i], panel.regions()[i], 0}; break;
            case MdeDesign::region_day: k = {day, panel.regions()[i], 0, 0}; break;
        }
        auto& c = cells[k];
        c.n += 1;
        if (panel.filled()[i]) {
            c.pay += panel.pays()[i];
            total_pay += panel.pays()[i];
        }
    }

    MdeCurve curve;
    curve.design = design;
    curve.units = cells.size();
    curve.units_per_day = static_cast<double>(cells.size()) / static_cast<double>(panel.day_keys().size());
    if (curve.units_per_day < 2.0)
        throw DesignError(std::string(mde_design_name(design)) + " design has fewer than two units per day");
    std::vector<double> yields;
    yields.reserve(cells.size());
    for (const auto& [k, c] : cells) yields.push_back(exact_ratio(c.pay, c.n));
    curve.sigma = sample_sd(yields);
    curve.baseline_yield = exact_ratio(total_pay, static_cast<std::int64_t>(panel.size()));
    const double z = normal_quantile(1.0 - power.alpha / 2.0) + normal_quantile(power.power);
    const double abs1 = z * 2.0 * curve.sigma / std::sqrt(curve.units_per_day);
    curve.c = curve.baseline_yield == 0.0 ? 0.0 : abs1 / curve.baseline_yield;
    for (int t : durations) {
        const double rel = curve.c / std::sqrt(static_cast<double>(t));
        curve.points.push_back({t, rel, curve.baseline_yield * rel});
    }
    return curve;
}

// ---------------------------------------------------------------------------

const char* evidence_class_name(EvidenceClass c) {
    switch (c) {
        case EvidenceClass::replay: return "replay";
        case EvidenceClass::guardrails: return "guardrails";
        case EvidenceClass::ope: return "ope";
        case EvidenceClass::support: return "support";
        case EvidenceClass::validation: return "validation";
        case EvidenceClass::response: return "response";
        case EvidenceClass::interference: return "interference";
    }
    return "?";
}

std::vector<AblationRule> default_ablation_rules() {
    using E = EvidenceClass;
    return {
        {"replay_only", RuleCriterion::replay_lift, {E::replay}},
        {"replay_guardrails", RuleCriterion::guarded_replay_lift, {E::replay, E::guardrails}},
        {"ope_mean_only", RuleCriterion::ope_mean, {E::ope}},
        {"ope_lower_tail_only", RuleCriterion::ope_lower_tail, {E::ope, E::support}},
        {"validation_replay_only", RuleCriterion::validation_lift, {E::replay, E::validation}},
        {"full_dss", RuleCriterion::full,
         {E::replay, E::guardrails, E::ope, E::support, E::validation, E::response, E::interference}},
    };
}

std::vector<AblationRow> ablation(const AblationInputs& in, std::span<const AblationRule> rules) {
    std::vector<AblationRow> rows;
    for (const auto& rule : rules) {
        AblationRow row;
        row.rule = rule.name;
        std::vector<EvidenceClass> classes = rule.evidence;
        std::sort(classes.begin(), classes.end());
        classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
        for (std::size_t k = 0; k < classes.size(); ++k)
            row.evidence += (k ? "+" : "") + std::string(evidence_class_name(classes[k]));
        row.unresolved_gates = static_cast<int>(kEvidenceClassCount - classes.size());

        bool found = false;
        auto consider = [&](int id, double value) {
            if (!found || value > row.criterion_value || (value == row.criterion_value && id < row.selected_policy)) {
                row.selected_policy = id;
                row.criterion_value = value;
                found = true;
            }
        };
        switch (rule.criterion) {
            case RuleCriterion::replay_lift:
                for (const auto& r : in.replay) consider(r.policy_id, r.lift);
                break;
            case RuleCriterion::guarded_replay_lift:
                for (const auto& r : in.replay)
                    if (in.guard && in.guard->row(r.policy_id).all_pass) consider(r.policy_id, r.lift);
                break;
            case RuleCriterion::ope_mean:
                for (const auto& e : in.ope) consider(e.policy_id, e.crossfit_lift);
                break;
            case RuleCriterion::ope_lower_tail:
                for (const auto& e : in.ope) consider(e.policy_id, e.boot_p10);
                break;
            case RuleCriterion::validation_lift:
                for (const auto& r : in.validation) consider(r.policy_id, r.lift);
                break;
            case RuleCriterion::full:
                break;
        }
        if (rule.criterion == RuleCriterion::full) {
            row.selected_policy = in.full_selected;
            row.action = action_name(in.full_action);
            row.overclaim = in.full_action == Action::launch && !in.online_resolved;
        } else {
            const bool favorable = found && row.criterion_value > 0.0;
            row.action = favorable ? "direct_launch" : "no_action";
            row.overclaim = favorable && !in.online_resolved;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace floorlab
