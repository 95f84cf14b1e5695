#pragma once

// Subcommands. Each one is a pure function of (config, flags, seed) that
// returns the files it wants written plus a short console summary; the
// application layer owns the filesystem and the manifest.

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fso/channel.hpp"
#include "fso/cli/config.hpp"
#include "fso/cli/csv.hpp"
#include "fso/metrics.hpp"
#include "fso/monte_carlo.hpp"
#include "fso/optimizer.hpp"
#include "fso/sigchain.hpp"

namespace fso::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_unreachable = 2,
    exit_io = 3,
};

struct CommandOutput {
    int exit_code = exit_ok;
    std::map<std::string, std::string> files; // name -> contents
    std::string summary;
};

namespace detail {

inline std::string line(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

inline void budget_row(CsvWriter& csv, const LinkBudgetResult& r, bool ok) {
    csv.row() << r.distance << r.stages << r.rx_power << r.path_loss_db << r.mark_current
              << r.space_current << r.sigma1 << r.sigma0 << r.snr << r.q_factor << r.ber
              << r.log10_ber << r.ber_snr_formula << ok;
}

inline const std::vector<std::string> budget_header = {
    "distance_m", "stages",   "rx_power_dbm", "path_loss_db", "mark_current_a",
    "space_current_a", "sigma1_a", "sigma0_a", "snr", "q_factor", "ber", "log10_ber",
    "ber_snr_formula", "feasible"};

} // namespace detail

/// One analytic row. Without `stages` the amplifier path is selected
/// automatically; an unreachable link yields exit code 2 and the best attempt.
inline CommandOutput cmd_budget(const RunConfig& rc, double distance, std::optional<int> stages) {
    CommandOutput out;
    CsvWriter csv(detail::budget_header);
    LinkBudgetResult r;
    bool ok = true;
    if (stages) {
        r = evaluate_link(rc.link, distance, *stages);
        ok = feasible(rc.link, rc.constraints, distance, *stages);
    } else {
        try {
            r = select_amplifier_path(rc.link, rc.constraints, distance).result;
        } catch (const LinkUnreachable& e) {
            r = e.best();
            ok = false;
        }
    }
    detail::budget_row(csv, r, ok);
    out.files["budget.csv"] = csv.str();
    out.summary = detail::line(
        "distance %.17g m, stages %d: rx %.6g dBm, Q %.6g, BER %.6g (log10 %.6g)%s\n", r.distance,
        r.stages, r.rx_power, r.q_factor, r.ber, r.log10_ber, ok ? "" : "  [link unreachable]");
    out.exit_code = ok ? exit_ok : exit_unreachable;
    return out;
}

struct SweepGrid {
    double start = 0.0;
    double stop = 5000.0;
    double step = 50.0;

    std::size_t size() const {
        return static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    }
};

/// Q / received power over a distance grid at a fixed stage count
/// (max_amplifier_stages unless given).
inline CommandOutput cmd_sweep(const RunConfig& rc, const SweepGrid& grid, std::optional<int> stages) {
    fso::detail::require(grid.start >= 0.0 && grid.start < grid.stop && grid.step > 0.0 &&
                             std::isfinite(grid.stop),
                         "sweep: need 0 <= start < stop and step > 0");
    const int k = stages.value_or(rc.link.max_amplifier_stages);
    CommandOutput out;
    CsvWriter csv({"distance_m", "rx_power_dbm", "snr", "q_factor", "ber", "log10_ber", "stages"});
    const std::size_t n = grid.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = grid.start + static_cast<double>(i) * grid.step;
        const auto r = evaluate_link(rc.link, d, k);
        csv.row() << d << r.rx_power << r.snr << r.q_factor << r.ber << r.log10_ber << r.stages;
    }
    out.files["sweep.csv"] = csv.str();
    out.summary = detail::line("%zu grid points, %d stage(s)\n", n, k);
    return out;
}

/// Range optimization for the haze / rain-mist / fog scenarios.
inline CommandOutput cmd_optimize(const RunConfig& rc, bool exhaustive) {
    SearchOptions opt = rc.search;
    opt.exhaustive = exhaustive;
    const auto rows = weather_profile(rc.link, rc.constraints, opt);

    CommandOutput out;
    CsvWriter table({"scenario", "attenuation_db_per_km", "status", "max_distance_m", "stages",
                     "amplifier_gain_db", "rx_power_dbm", "q_factor", "ber", "log10_ber",
                     "log10_objective", "objective_clamped", "iterations"});
    for (const auto& row : rows) {
        const auto& res = row.result;
        auto w = table.row();
        w << row.scenario.name << row.scenario.attenuation_db_per_km << to_string(res.status);
        if (res.final) {
            const auto& f = *res.final;
            w << *res.max_distance << res.stages << res.amplifier_gain << f.rx_power << f.q_factor
              << f.ber << f.log10_ber;
            if (res.objective)
                w << res.objective->log10_h << res.objective->clamped;
            else
                w << "" << "";
        } else {
            w << "" << "" << res.amplifier_gain << "" << "" << "" << "" << "" << "";
        }
        w << static_cast<unsigned long>(res.iterations.size());

        CsvWriter trace({"iteration", "lo_m", "hi_m", "midpoint_m", "feasible"});
        for (std::size_t i = 0; i < res.iterations.size(); ++i) {
            const auto& it = res.iterations[i];
            trace.row() << static_cast<unsigned long>(i) << it.lo << it.hi << it.midpoint << it.feasible;
        }
        out.files["trace_" + row.scenario.name + ".csv"] = trace.str();

        if (res.status == OptimizationStatus::infeasible_everywhere) out.exit_code = exit_unreachable;
        if (res.final) {
            out.summary += detail::line("%-10s %5.1f dB/km  L* = %.17g m  stages %d  Q %.6g  log10 BER %.6g  [%s]\n",
                                        row.scenario.name.c_str(), row.scenario.attenuation_db_per_km,
                                        *res.max_distance, res.stages, res.final->q_factor,
                                        res.final->log10_ber, to_string(res.status));
        } else {
            out.summary += detail::line("%-10s %5.1f dB/km  infeasible over the whole bracket\n",
                                        row.scenario.name.c_str(), row.scenario.attenuation_db_per_km);
        }
    }
    out.files["optimize.csv"] = table.str();
    return out;
}

/// Monte-Carlo eye: every bit's decision-centred window plus a stats row.
inline CommandOutput cmd_eye(const RunConfig& rc, double distance, std::optional<int> stages,
                             std::size_t n_bits, std::uint64_t seed, unsigned threads) {
    fso::detail::require(n_bits >= 1000, "eye: at least 1000 bits required");
    int k;
    if (stages) {
        k = *stages;
    } else {
        try {
            k = select_amplifier_path(rc.link, rc.constraints, distance).stages;
        } catch (const LinkUnreachable& e) {
            k = e.best().stages;
        }
    }
    MonteCarloOptions mc;
    mc.n_bits = n_bits;
    mc.seed = seed;
    mc.threads = threads;
    mc.capture_traces = n_bits;
    const auto res = run_monte_carlo(rc.link, distance, k, mc);

    CommandOutput out;
    const auto spb = static_cast<std::size_t>(rc.link.samples_per_bit);
    CsvWriter traces({"trace", "tx_bit", "time_in_bit", "current_a", "is_decision"});
    for (std::size_t t = 0; t < res.trace_count; ++t) {
        for (std::size_t j = 0; j < spb; ++j) {
            traces.row() << static_cast<unsigned long>(t) << static_cast<int>(res.tx_bits[t])
                         << static_cast<double>(j) / static_cast<double>(spb)
                         << res.traces[t * spb + j] << (j == spb / 2);
        }
    }

    double q = std::numeric_limits<double>::infinity();
    try {
        q = q_factor(res.eye);
    } catch (const Error&) {
    }
    CsvWriter stats({"distance_m", "stages", "n_bits", "seed", "mu0_a", "mu1_a", "sigma0_a",
                     "sigma1_a", "q_factor", "eye_opening_a", "threshold_a", "errors",
                     "counted_ber", "analytic_q", "analytic_ber", "analytic_log10_ber"});
    stats.row() << distance << k << static_cast<unsigned long>(n_bits)
                << static_cast<unsigned long long>(seed) << res.eye.mu0 << res.eye.mu1
                << res.eye.sigma0 << res.eye.sigma1 << q << res.eye.eye_opening << res.threshold
                << static_cast<unsigned long>(res.errors) << res.ber << res.analytic.q_factor
                << res.analytic.ber << res.analytic.log10_ber;
    out.files["eye_traces.csv"] = traces.str();
    out.files["eye_stats.csv"] = stats.str();
    out.summary = detail::line(
        "%zu bits at %.17g m, %d stage(s): Q %.6g, opening %.6g A, %zu errors (analytic Q %.6g)\n",
        n_bits, distance, k, q, res.eye.eye_opening, res.errors, res.analytic.q_factor);
    return out;
}

} // namespace fso::cli
