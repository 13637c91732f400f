#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "floorlab/guardrails.hpp"
#include "floorlab/ope.hpp"
#include "floorlab/replay.hpp"

namespace floorlab {

enum class Action { launch, validate_online, hold, redesign };

const char* action_name(Action a);
Action parse_action(const std::string& name);

enum class Gate { R, T, S, C, H, B, I };
inline constexpr std::size_t kGateCount = 7;
const char* gate_name(Gate g);

struct GateEvidence {
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string source;  // which evidence produced the gate, or "missing"
    std::string note;
};

struct GateVector {
    std::array<GateEvidence, kGateCount> gates;

    GateEvidence& operator[](Gate g) { return gates[static_cast<std::size_t>(g)]; }
    const GateEvidence& operator[](Gate g) const { return gates[static_cast<std::size_t>(g)]; }

    bool q_minus_i() const;  // R T S C H B
    bool q() const;          // q_minus_i and I

    /// Bit k of mask sets gate k in R,T,S,C,H,B,I order.
    static GateVector from_bits(unsigned mask);
    unsigned bits() const;
};

/// launch iff Q; validate_online iff Q_{-I} and not I; otherwise redesign
/// when H fails or the measurement is flagged, else hold.
Action decide(const GateVector& gates, bool measurement_failure = false);

struct TransferResult {
    bool available = false;  // false: no validation panel; gate reported as a placeholder pass
    bool pass = false;
    double validation_lift = 0.0;
    int validation_rank = 0;
    double impression_share = 0.0, click_share = 0.0, conversion_share = 0.0, value_proxy_share = 0.0;
    std::string note;
};

/// Positive validation lift, dense validation rank <= r_max, and retention at
/// or above the guardrail thresholds. Throws ContractError when the two
/// windows were replayed with different catalogs.
TransferResult transfer_gate(std::span<const ReplayResult> discovery, std::span<const ReplayResult> validation,
                             int policy_id, int r_max = 3, const GuardrailConfig& thresholds = {});

struct EvidenceBundle {
    int policy_id = 0;
    std::optional<ReplayResult> replay;
    std::optional<TransferResult> transfer;
    std::optional<OpeEstimate> ope;
    std::optional<GuardrailRow> guardrails;
    std::optional<double> breakeven_rho;
    double breakeven_threshold = 0.15;
    LowerTailMode lower_tail = LowerTailMode::boot_p10;
    std::string online_attestation;  // non-empty names the online experiment backing I = 1
};

/// Missing evidence yields a failed gate with source "missing"; the only
/// exception is an unavailable transfer check, which passes as a placeholder.
GateVector evaluate_gates(const EvidenceBundle& evidence);

/// Ids of policies not weakly Pareto-dominated on (lift, impression share,
/// guardrails passed). Equal candidates are all kept.
std::vector<int> prune_dominated(std::span<const ReplayResult> results, const GuardrailMatrix& guard);

// ---------------------------------------------------------------------------
// Validation design
// ---------------------------------------------------------------------------

enum class MdeDesign { advertiser, exchange_hour, exchange_region, region_day };
const char* mde_design_name(MdeDesign d);
MdeDesign parse_mde_design(const std::string& name);
std::span<const MdeDesign> all_mde_designs();

struct PowerConfig {
    double alpha = 0.05;  // two-sided
    double power = 0.80;
};

struct MdePoint {
    int days = 0;
    double relative = 0.0;
    double absolute = 0.0;
};

struct MdeCurve {
    MdeDesign design = MdeDesign::advertiser;
    std::size_t units = 0;        // one-day assignment cells in the panel
    double units_per_day = 0.0;   // G_d
    double sigma = 0.0;           // sd of unit baseline yield per opportunity
    double baseline_yield = 0.0;  // Y0: baseline yield per opportunity
    double c = 0.0;               // relative one-day MDE
    std::vector<MdePoint> points;
};

/// Throws DesignError when fewer than two units per day are available and
/// EmptyPanelError on an empty panel.
MdeCurve mde_curve(const Panel& panel, MdeDesign design, std::span<const int> durations,
                   const PowerConfig& power = {});

// ---------------------------------------------------------------------------
// Decision-rule ablation
// ---------------------------------------------------------------------------

enum class EvidenceClass { replay, guardrails, ope, support, validation, response, interference };
inline constexpr std::size_t kEvidenceClassCount = 7;
const char* evidence_class_name(EvidenceClass c);

enum class RuleCriterion { replay_lift, guarded_replay_lift, ope_mean, ope_lower_tail, validation_lift, full };

struct AblationRule {
    std::string name;
    RuleCriterion criterion = RuleCriterion::replay_lift;
    std::vector<EvidenceClass> evidence;
};

/// Replay-only, replay + guardrails, OPE mean, OPE lower tail, validation
/// replay only, and the full rule.
std::vector<AblationRule> default_ablation_rules();

struct AblationInputs {
    std::span<const ReplayResult> replay;
    const GuardrailMatrix* guard = nullptr;
    std::span<const OpeEstimate> ope;
    std::span<const ReplayResult> validation;  // empty when no validation window
    int full_selected = -1;
    Action full_action = Action::redesign;
    bool online_resolved = false;  // I = 1
};

struct AblationRow {
    std::string rule;
    std::string evidence;  // '+'-joined class names
    int selected_policy = -1;  // -1: nothing selectable
    double criterion_value = 0.0;
    std::string action;        // direct_launch | no_action for simplified rules; decide() for the full rule
    bool overclaim = false;    // a launch without online evidence
    int unresolved_gates = 0;  // evidence classes the rule does not consult
};

std::vector<AblationRow> ablation(const AblationInputs& inputs, std::span<const AblationRule> rules);

}  // namespace floorlab
