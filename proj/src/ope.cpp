#include "floorlab/ope.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "floorlab/error.hpp"
#include "floorlab/rng.hpp"
#include "floorlab/stats.hpp"

namespace floorlab {

const char* ope_method_name(OpeMethod m) {
    switch (m) {
        case OpeMethod::dm: return "dm";
        case OpeMethod::ipw: return "ipw";
        case OpeMethod::dr: return "dr";
    }
    return "?";
}

const char* lower_tail_mode_name(LowerTailMode m) {
    return m == LowerTailMode::boot_p10 ? "boot_p10" : "z_score";
}

LowerTailMode parse_lower_tail_mode(const std::string& name) {
    if (name == "boot_p10") return LowerTailMode::boot_p10;
    if (name == "z_score") return LowerTailMode::z_score;
    throw ConfigError("unknown lower-tail mode '" + name + "'");
}

void OpeConfig::validate() const {
    if (k_folds < 2) throw ConfigError("ope.k_folds must be >= 2");
    if (boot_B < 1) throw ConfigError("ope.boot_B must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("ope.alpha must be in (0, 1)");
    if (caps.empty()) throw ConfigError("ope.caps is empty");
    for (std::size_t i = 0; i < caps.size(); ++i) {
        if (!(caps[i] > 0.0)) throw ConfigError("ope.caps must be positive");
        if (i > 0 && !(caps[i] > caps[i - 1])) throw ConfigError("ope.caps must be ascending");
    }
    if (!(min_ess_share >= 0.0 && min_ess_share <= 1.0)) throw ConfigError("ope.min_ess_share must be in [0, 1]");
    if (!(max_p99_weight > 0.0)) throw ConfigError("ope.max_p99_weight must be positive");
    model.validate();
}

TargetSupport resolve_target(const LoggedActionPanel& logged, const PolicySpec& target) {
    const std::size_t n = logged.size();
    const std::size_t k = logged.n_actions();
    const auto floors = logged.panel.floors();
    const auto bids = logged.panel.bids();
    const Money tol = logged.floor_tolerance;
    // A target that is itself a logged action is predicted with its own model.
    int own = -1;
    for (std::size_t a = 0; a < k; ++a)
        if (logged.shortlist[a] == target) own = static_cast<int>(a);
    TargetSupport s;
    s.floors.resize(n);
    s.action.resize(n);
    s.propensity.resize(n);
    s.weights.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const Money f = apply_policy(target, floors[i], bids[i], logged.catalog);
        s.floors[i] = f;
        double e = 0.0;
        int first = -1;
        for (std::size_t a = 0; a < k; ++a) {
            const Money d = logged.floor(i, a) - f;
            if (d <= tol && d >= -tol) {
                e += logged.action_probs[a];
                if (first < 0) first = static_cast<int>(a);
            }
        }
        if (first < 0)
            throw SupportError(target.label() + " sets a floor on row " + std::to_string(i) +
                               " that no logged action covers");
        const bool own_matches = own >= 0 && [&] {
            const Money d = logged.floor(i, static_cast<std::size_t>(own)) - f;
            return d <= tol && d >= -tol;
        }();
        s.action[i] = static_cast<std::uint16_t>(own_matches ? own : first);
        s.propensity[i] = e;
        const Money d = logged.floor(i, logged.actions[i]) - f;
        if (d <= tol && d >= -tol) {
            if (!(e > 0.0)) throw OverlapError("matched row " + std::to_string(i) + " has zero propensity");
            s.weights[i] = 1.0 / e;
            ++s.matched;
        }
    }
    return s;
}

std::vector<double> dr_scores(const LoggedActionPanel& logged, const TargetSupport& support,
                              const RewardModel& model, double cap) {
    std::vector<double> psi(logged.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        // A matched row's logged floor equals the target's, so one model term serves both.
        const double m_pi = model.predict(logged, i, support.action[i]);
        const double w = std::min(support.weights[i], cap);
        psi[i] = m_pi + w * (static_cast<double>(logged.rewards[i]) - m_pi);
    }
    return psi;
}

namespace {

double ipw_value(const LoggedActionPanel& logged, const TargetSupport& support, double cap) {
    std::vector<double> terms(logged.size());
    for (std::size_t i = 0; i < terms.size(); ++i)
        terms[i] = std::min(support.weights[i], cap) * static_cast<double>(logged.rewards[i]);
    return mean(terms);
}

double dm_value(const LoggedActionPanel& logged, const TargetSupport& support, const RewardModel& model) {
    std::vector<double> terms(logged.size());
    for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = model.predict(logged, i, support.action[i]);
    return mean(terms);
}

double estimate(const LoggedActionPanel& logged, const TargetSupport& support, const RewardModel& model,
                OpeMethod method) {
    switch (method) {
        case OpeMethod::dm: return dm_value(logged, support, model);
        case OpeMethod::ipw: return ipw_value(logged, support, kNoCap);
        case OpeMethod::dr: return mean(dr_scores(logged, support, model));
    }
    return 0.0;
}

double ratio_lift(double v, double v0) { return v0 == 0.0 ? 0.0 : v / v0 - 1.0; }

}  // namespace

double estimate_value(const LoggedActionPanel& logged, const PolicySpec& target, const RewardModel& model,
                      OpeMethod method) {
    if (logged.size() == 0) throw EmptyPanelError("logged panel is empty");
    return estimate(logged, resolve_target(logged, target), model, method);
}

double effective_sample_size(std::span<const double> weights) {
    double s = 0.0, s2 = 0.0;
    for (double w : weights) {
        s += w;
        s2 += w * w;
    }
    if (!(s2 > 0.0)) throw SupportError("every importance weight is zero");
    return s * s / s2;
}

double weight_p99(std::span<const double> weights) {
    std::vector<double> nz;
    for (double w : weights)
        if (w > 0.0) nz.push_back(w);
    return nz.empty() ? 0.0 : nearest_rank(std::move(nz), 0.99);
}

std::vector<ClipPoint> clipping_sweep(const LoggedActionPanel& logged, const PolicySpec& target,
                                      std::span<const double> caps, const RewardModel& model) {
    for (std::size_t i = 0; i < caps.size(); ++i) {
        if (!(caps[i] > 0.0)) throw ConfigError("clipping caps must be positive");
        if (i > 0 && !(caps[i] > caps[i - 1])) throw ConfigError("clipping caps must be ascending");
    }
    const auto support = resolve_target(logged, target);
    std::vector<ClipPoint> out;
    for (double c : caps) out.push_back({c, ipw_value(logged, support, c), mean(dr_scores(logged, support, model, c))});
    return out;
}

CrossfitRewardModel::CrossfitRewardModel(const LoggedActionPanel& logged, std::size_t k_folds,
                                         const ModelConfig& config) {
    if (k_folds < 2) throw ConfigError("cross-fitting needs at least two folds");
    for (std::size_t f = 0; f < k_folds; ++f) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < logged.size(); ++i)
            if (i % k_folds != f) rows.push_back(i);
        folds_.emplace_back(logged, rows, config);
    }
}

double CrossfitRewardModel::predict(const LoggedActionPanel& logged, std::size_t row, std::size_t action) const {
    return folds_[row % folds_.size()].predict(logged, row, action);
}

std::vector<BootstrapLift> bootstrap_lifts(std::span<const std::vector<double>> target_scores,
                                           std::span<const double> baseline_scores, std::size_t B,
                                           std::uint64_t seed, std::size_t threads) {
    const std::size_t n = baseline_scores.size();
    const std::size_t t_count = target_scores.size();
    if (n == 0) throw EmptyPanelError("bootstrap needs scored rows");
    if (B == 0) throw ConfigError("bootstrap needs at least one replicate");
    for (const auto& s : target_scores)
        if (s.size() != n) throw ContractError("score vectors differ in length");

    // lifts[t][b]; NaN marks a replicate whose baseline mean is zero.
    std::vector<std::vector<double>> lifts(t_count, std::vector<double>(B));
    const CounterRng rng(seed, streams::kBootstrap);
    auto run = [&](std::size_t b) {
        std::vector<double> sums(t_count, 0.0);
        double base = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const auto idx = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(b) * n + j, n));
            base += baseline_scores[idx];
            for (std::size_t t = 0; t < t_count; ++t) sums[t] += target_scores[t][idx];
        }
        for (std::size_t t = 0; t < t_count; ++t)
            lifts[t][b] = base == 0.0 ? std::nan("") : sums[t] / base - 1.0;
    };
    const std::size_t n_threads = std::clamp<std::size_t>(threads, 1, B);
    if (n_threads == 1) {
        for (std::size_t b = 0; b < B; ++b) run(b);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t b = t; b < B; b += n_threads) run(b);
            });
    }

    const double base_mean = mean(baseline_scores);
    if (base_mean == 0.0) throw UndefinedLiftError("baseline DR value is zero; lift is undefined");
    std::vector<BootstrapLift> out;
    for (std::size_t t = 0; t < t_count; ++t) {
        std::vector<double> v;
        for (double x : lifts[t])
            if (!std::isnan(x)) v.push_back(x);
        BootstrapLift r;
        r.point = mean(target_scores[t]) / base_mean - 1.0;
        r.replicates = v.size();
        if (!v.empty()) {
            r.median = nearest_rank(v, 0.5);
            r.p10 = nearest_rank(v, 0.1);
            r.p90 = nearest_rank(v, 0.9);
            r.se = sample_sd(v);
        }
        out.push_back(r);
    }
    return out;
}

namespace {

std::vector<std::string> empty_fold_warnings(const TargetSupport& s, std::size_t k, const std::string& label) {
    std::vector<std::size_t> matched(k, 0);
    for (std::size_t i = 0; i < s.weights.size(); ++i)
        if (s.weights[i] > 0.0) ++matched[i % k];
    std::vector<std::string> w;
    for (std::size_t f = 0; f < k; ++f)
        if (matched[f] == 0) w.push_back(label + ": fold " + std::to_string(f) + " has no matched rows");
    return w;
}

}  // namespace

CrossfitResult crossfit_dr(const LoggedActionPanel& logged, const PolicySpec& target, const OpeConfig& config) {
    config.validate();
    const CrossfitRewardModel model(logged, config.k_folds, config.model);
    const auto support = resolve_target(logged, target);
    const auto base_support = resolve_target(logged, logged.catalog.by_id(0));
    CrossfitResult r;
    r.warnings = empty_fold_warnings(support, config.k_folds, target.label());
    r.target_scores = dr_scores(logged, support, model);
    r.baseline_scores = dr_scores(logged, base_support, model);
    const std::vector<std::vector<double>> targets{r.target_scores};
    r.lift = bootstrap_lifts(targets, r.baseline_scores, config.boot_B, config.seed, config.threads).front();
    return r;
}

double lower_bound_score(double lift, double se, double alpha) {
    if (!(se >= 0.0)) throw DomainError("standard error must be >= 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must be in (0, 1)");
    return lift - normal_quantile(1.0 - alpha) * se;
}

std::vector<OpeEstimate> evaluate_policies(const LoggedActionPanel& logged, std::span<const PolicySpec> targets,
                                           const RewardModel& models, const OpeConfig& config) {
    config.validate();
    if (logged.size() == 0) throw EmptyPanelError("logged panel is empty");
    const auto base_support = resolve_target(logged, logged.catalog.by_id(0));
    const double v0_dm = estimate(logged, base_support, models, OpeMethod::dm);
    const double v0_ipw = estimate(logged, base_support, models, OpeMethod::ipw);
    const double v0_dr = estimate(logged, base_support, models, OpeMethod::dr);

    const CrossfitRewardModel crossfit(logged, config.k_folds, config.model);
    const auto base_scores = dr_scores(logged, base_support, crossfit);

    std::vector<OpeEstimate> out;
    std::vector<std::vector<double>> target_scores;
    for (const auto& spec : targets) {
        const auto support = resolve_target(logged, spec);
        OpeEstimate e;
        e.policy_id = spec.id;
        e.n = logged.size();
        e.matched = support.matched;
        e.v_dm = estimate(logged, support, models, OpeMethod::dm);
        e.v_ipw = estimate(logged, support, models, OpeMethod::ipw);
        e.v_dr = estimate(logged, support, models, OpeMethod::dr);
        e.lift_dm = ratio_lift(e.v_dm, v0_dm);
        e.lift_ipw = ratio_lift(e.v_ipw, v0_ipw);
        e.lift_dr = ratio_lift(e.v_dr, v0_dr);
        if (support.matched > 0) {
            e.ess = effective_sample_size(support.weights);
            e.ess_share = e.ess / static_cast<double>(e.n);
            e.p99_weight = weight_p99(support.weights);
        } else {
            e.warnings.push_back("no logged row matches the target action");
        }
        e.support_pass = support.matched > 0 && e.ess_share >= config.min_ess_share &&
                         e.p99_weight <= config.max_p99_weight;
        for (double c : config.caps)
            e.clip_sweep.push_back({c, ipw_value(logged, support, c), mean(dr_scores(logged, support, models, c))});
        auto w = empty_fold_warnings(support, config.k_folds, spec.label());
        e.warnings.insert(e.warnings.end(), w.begin(), w.end());
        target_scores.push_back(dr_scores(logged, support, crossfit));
        out.push_back(std::move(e));
    }

    const auto boot = bootstrap_lifts(target_scores, base_scores, config.boot_B, config.seed, config.threads);
    for (std::size_t t = 0; t < out.size(); ++t) {
        auto& e = out[t];
        e.crossfit_lift = boot[t].point;
        e.boot_median = boot[t].median;
        e.boot_p10 = boot[t].p10;
        e.boot_p90 = boot[t].p90;
        e.boot_se = boot[t].se;
        e.lower_bound = lower_bound_score(e.crossfit_lift, e.boot_se, config.alpha);
    }
    return out;
}

double lower_tail_score(const OpeEstimate& e, LowerTailMode mode) {
    return mode == LowerTailMode::boot_p10 ? e.boot_p10 : e.lower_bound;
}

std::vector<int> rank_conservative(std::span<const OpeEstimate> estimates, const GuardrailMatrix& guard,
                                   LowerTailMode mode) {
    const auto feasible = guard.feasible();
    std::vector<const OpeEstimate*> pool;
    for (const auto& e : estimates)
        if (std::find(feasible.begin(), feasible.end(), e.policy_id) != feasible.end()) pool.push_back(&e);
    std::stable_sort(pool.begin(), pool.end(), [mode](const OpeEstimate* a, const OpeEstimate* b) {
        const double sa = lower_tail_score(*a, mode), sb = lower_tail_score(*b, mode);
        if (sa != sb) return sa > sb;
        if (a->ess_share != b->ess_share) return a->ess_share > b->ess_share;
        return a->policy_id < b->policy_id;
    });
    std::vector<int> ids;
    for (const auto* e : pool) ids.push_back(e->policy_id);
    return ids;
}

std::vector<SegmentLift> segment_heterogeneity(const LoggedActionPanel& logged,
                                               std::span<const double> target_scores,
                                               std::span<const double> baseline_scores,
                                               std::span<const ContextKey> dimensions, std::size_t min_cell,
                                               double large_negative) {
    const std::size_t n = logged.size();
    if (target_scores.size() != n || baseline_scores.size() != n)
        throw ContractError("segment scores must cover every logged row");
    struct Acc {
        std::size_t n = 0;
        double t = 0.0, b = 0.0;
    };
    auto finish = [&](std::string dim, std::string value, const Acc& a) {
        SegmentLift s;
        s.dimension = std::move(dim);
        s.value = std::move(value);
        s.n_rows = a.n;
        if (a.b != 0.0) {
            s.dr_lift = a.t / a.b - 1.0;  // the row counts cancel
            s.flag_large_negative = *s.dr_lift <= large_negative;
        }
        return s;
    };
    std::vector<SegmentLift> out;
    for (ContextKey dim : dimensions) {
        std::map<std::int64_t, Acc> cells;
        for (std::size_t i = 0; i < n; ++i) {
            auto& a = cells[context_value(logged.panel, i, dim)];
            a.n += 1;
            a.t += target_scores[i];
            a.b += baseline_scores[i];
        }
        std::vector<std::pair<std::int64_t, Acc>> large;
        Acc other;
        for (const auto& [v, a] : cells) {
            if (a.n >= min_cell) {
                large.emplace_back(v, a);
            } else {
                other.n += a.n;
                other.t += a.t;
                other.b += a.b;
            }
        }
        std::stable_sort(large.begin(), large.end(),
                         [](const auto& x, const auto& y) { return x.second.n > y.second.n; });
        for (const auto& [v, a] : large) out.push_back(finish(context_key_name(dim), std::to_string(v), a));
        if (other.n > 0) out.push_back(finish(context_key_name(dim), "other", other));
    }
    return out;
}

}  // namespace floorlab
