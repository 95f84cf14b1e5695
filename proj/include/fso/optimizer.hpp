#pragma once

// Constrained range maximization: the longest distance at which the link
// still meets the BER ceiling and the data-rate floor, with the amplifier
// path (number of switched-in stages) chosen per distance.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fso/channel.hpp"
#include "fso/core.hpp"
#include "fso/metrics.hpp"
#include "fso/sigchain.hpp"

namespace fso {

inline bool feasible(const LinkConfig& cfg, const Constraints& cons, double distance, int stages) {
    if (cfg.bit_rate < cons.min_rate) return false;
    return evaluate_link(cfg, distance, stages).ber <= cons.max_ber;
}

/// No amplifier path meets the constraints; carries the best attempt.
class LinkUnreachable : public Error {
public:
    explicit LinkUnreachable(const LinkBudgetResult& best)
        : Error(ErrorCode::link_unreachable,
                "link unreachable: best achievable BER is 10^" + std::to_string(best.log10_ber) +
                    " with " + std::to_string(best.stages) + " stage(s)"),
          best_(best) {}

    const LinkBudgetResult& best() const noexcept { return best_; }

private:
    LinkBudgetResult best_;
};

struct AmplifierPath {
    int stages;
    LinkBudgetResult result;
};

/// Fewest amplifier stages that satisfy the constraints at `distance`.
/// Short links bypass the amplifier entirely.
inline AmplifierPath select_amplifier_path(const LinkConfig& cfg, const Constraints& cons,
                                           double distance) {
    detail::require(distance >= 0.0, "select_amplifier_path: distance must be nonnegative");
    std::optional<LinkBudgetResult> best;
    for (int k = 0; k <= cfg.max_amplifier_stages; ++k) {
        auto r = evaluate_link(cfg, distance, k);
        if (cfg.bit_rate >= cons.min_rate && r.ber <= cons.max_ber) return {k, r};
        if (!best || r.log10_ber < best->log10_ber) best = r;
    }
    throw LinkUnreachable(*best);
}

inline bool feasible_any_path(const LinkConfig& cfg, const Constraints& cons, double distance) {
    if (cfg.bit_rate < cons.min_rate) return false;
    for (int k = 0; k <= cfg.max_amplifier_stages; ++k)
        if (evaluate_link(cfg, distance, k).ber <= cons.max_ber) return true;
    return false;
}

struct CombinedObjective {
    double log10_h;
    bool clamped; // BER was below the reporting floor
};

/// log10(g / f) for range g (m) and BER f; the linear ratio overflows at
/// realistic error rates.
inline CombinedObjective combined_objective(double distance, double ber) {
    detail::require(distance > 0.0, "combined_objective: distance must be positive");
    detail::require(ber >= 0.0, "combined_objective: BER must be nonnegative");
    const bool clamped = ber < ber_floor;
    return {std::log10(distance) - std::log10(clamped ? ber_floor : ber), clamped};
}

struct Bracket {
    double lo = 1.0;      // m
    double hi = 100000.0; // m
};

enum class OptimizationStatus { converged, infeasible_everywhere, feasible_at_upper_bound };

inline const char* to_string(OptimizationStatus s) {
    switch (s) {
    case OptimizationStatus::converged: return "converged";
    case OptimizationStatus::infeasible_everywhere: return "infeasible_everywhere";
    case OptimizationStatus::feasible_at_upper_bound: return "feasible_at_upper_bound";
    }
    return "?";
}

struct BisectionStep {
    double lo;
    double hi;
    double midpoint;
    bool feasible;
};

struct OptimizationResult {
    OptimizationStatus status = OptimizationStatus::infeasible_everywhere;
    std::optional<double> max_distance; // m, absent when infeasible everywhere
    int stages = 0;
    std::optional<LinkBudgetResult> final;
    std::optional<CombinedObjective> objective;
    double amplifier_gain = 0.0; // dB per stage used for the result
    std::vector<BisectionStep> iterations;
};

struct SearchOptions {
    Bracket bracket;
    double tolerance = 1.0; // m
    bool exhaustive = false; // grid scan at `tolerance` spacing instead of bisection
};

namespace detail {

inline void finish(OptimizationResult& out, const LinkConfig& cfg, const Constraints& cons,
                   std::optional<int> stages) {
    out.amplifier_gain = cfg.amplifier_gain;
    if (!out.max_distance) return;
    const double d = *out.max_distance;
    LinkBudgetResult r;
    if (stages) {
        r = evaluate_link(cfg, d, *stages);
    } else {
        r = select_amplifier_path(cfg, cons, d).result;
    }
    out.stages = r.stages;
    out.final = r;
    if (d > 0.0) out.objective = combined_objective(d, r.ber);
}

} // namespace detail

/// Largest distance in the bracket that meets the constraints. With a fixed
/// stage count only that path is probed; with std::nullopt every probe may
/// switch in any number of stages. Relies on BER being nondecreasing in
/// distance; use SearchOptions::exhaustive for configs where it is not.
inline OptimizationResult max_visibility_distance(const LinkConfig& cfg, const Constraints& cons,
                                                  std::optional<int> stages,
                                                  const SearchOptions& opt = {}) {
    const double lo0 = opt.bracket.lo, hi0 = opt.bracket.hi;
    detail::require(lo0 >= 0.0 && lo0 < hi0 && std::isfinite(hi0),
                    "max_visibility_distance: bracket must satisfy 0 <= lo < hi");
    detail::require(opt.tolerance > 0.0, "max_visibility_distance: tolerance must be positive");
    if (stages)
        detail::require(*stages >= 0 && *stages <= cfg.max_amplifier_stages,
                        "max_visibility_distance: stages must lie in [0, max_amplifier_stages]");

    auto ok = [&](double d) {
        return stages ? feasible(cfg, cons, d, *stages) : feasible_any_path(cfg, cons, d);
    };

    OptimizationResult out;
    if (opt.exhaustive) {
        const auto n = static_cast<std::size_t>(std::floor((hi0 - lo0) / opt.tolerance));
        for (std::size_t i = 0; i <= n; ++i) {
            const double d = lo0 + static_cast<double>(i) * opt.tolerance;
            if (ok(d)) out.max_distance = d;
        }
        if (ok(hi0)) out.max_distance = hi0;
        if (!out.max_distance)
            out.status = OptimizationStatus::infeasible_everywhere;
        else if (*out.max_distance == hi0)
            out.status = OptimizationStatus::feasible_at_upper_bound;
        else
            out.status = OptimizationStatus::converged;
        detail::finish(out, cfg, cons, stages);
        return out;
    }

    if (!ok(lo0)) {
        out.status = OptimizationStatus::infeasible_everywhere;
        detail::finish(out, cfg, cons, stages);
        return out;
    }
    if (ok(hi0)) {
        out.status = OptimizationStatus::feasible_at_upper_bound;
        out.max_distance = hi0;
        detail::finish(out, cfg, cons, stages);
        return out;
    }

    double lo = lo0, hi = hi0;
    while (hi - lo > opt.tolerance) {
        const double mid = 0.5 * (lo + hi);
        const bool f = ok(mid);
        out.iterations.push_back({lo, hi, mid, f});
        (f ? lo : hi) = mid;
    }
    out.status = OptimizationStatus::converged;
    out.max_distance = lo;
    detail::finish(out, cfg, cons, stages);
    return out;
}

/// Sweeps the per-stage gain over [amplifier_gain_min, amplifier_gain_max]
/// at a fixed stage count and keeps the setting with the longest range
/// (lowest gain on ties).
inline OptimizationResult refine_amplifier_gain(LinkConfig cfg, const Constraints& cons, int stages,
                                                const SearchOptions& opt = {},
                                                double gain_step_db = 0.25) {
    detail::require(gain_step_db > 0.0, "refine_amplifier_gain: gain step must be positive");
    std::optional<OptimizationResult> best;
    const double g0 = cfg.amplifier_gain_min, g1 = cfg.amplifier_gain_max;
    const auto n = static_cast<int>(std::floor((g1 - g0) / gain_step_db + 1e-9));
    for (int i = 0; i <= n; ++i) {
        cfg.amplifier_gain = g0 + i * gain_step_db;
        auto r = max_visibility_distance(cfg, cons, stages, opt);
        if (!r.max_distance) continue;
        if (!best || !best->max_distance || *r.max_distance > *best->max_distance) best = std::move(r);
    }
    if (!best) {
        cfg.amplifier_gain = g1;
        best = max_visibility_distance(cfg, cons, stages, opt);
    }
    return *best;
}

struct Scenario {
    std::string name;
    double attenuation_db_per_km;
};

/// Reference atmospheric scenarios: haze, rain/mist, fog.
inline std::vector<Scenario> reference_scenarios() {
    return {{"haze", 20.0}, {"rain_mist", 30.0}, {"fog", 70.0}};
}

struct ScenarioResult {
    Scenario scenario;
    OptimizationResult result;
};

/// Range optimization per scenario with adaptive stage selection, followed
/// by gain refinement when the config enables it.
inline std::vector<ScenarioResult> weather_profile(const LinkConfig& cfg, const Constraints& cons,
                                                   const SearchOptions& opt = {},
                                                   const std::vector<Scenario>& scenarios =
                                                       reference_scenarios()) {
    validate(cfg);
    validate(cons);
    std::vector<ScenarioResult> rows;
    for (const auto& sc : scenarios) {
        LinkConfig c = cfg;
        c.attenuation_db_per_km = sc.attenuation_db_per_km;
        auto r = max_visibility_distance(c, cons, std::nullopt, opt);
        if (c.refine_amplifier_gain && r.max_distance && r.stages > 0) {
            auto refined = refine_amplifier_gain(c, cons, r.stages, opt);
            if (refined.max_distance && *refined.max_distance > *r.max_distance) r = std::move(refined);
        }
        rows.push_back({sc, std::move(r)});
    }
    return rows;
}

} // namespace fso
