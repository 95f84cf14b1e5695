#pragma once

// fso-linksim command-line front end.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fso/cli/commands.hpp"
#include "fso/cli/config.hpp"

namespace fso::cli {

inline constexpr const char* tool_version = "1.0.0";

struct Invocation {
    std::string subcommand;
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<double> distance;
    std::optional<int> stages;
    std::uint64_t seed = 42;
    std::string out_dir = "fso_out";
    bool exhaustive = false;
    SweepGrid grid;
    std::size_t bits = 4096;
};

/// Thread cap from FSO_LINKSIM_THREADS; hardware concurrency otherwise.
inline unsigned thread_limit() {
    if (const char* env = std::getenv("FSO_LINKSIM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

inline std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Manifest document. Everything except "timestamp" is a function of the
/// inputs, so reruns can be compared with that one key removed.
inline nlohmann::json make_manifest(const Invocation& inv, const RunConfig& rc,
                                    const CommandOutput& out, double elapsed_ms) {
    nlohmann::json m;
    m["tool"] = "fso-linksim";
    m["tool_version"] = tool_version;
    m["subcommand"] = inv.subcommand;
    m["config_path"] = inv.config_path;
    m["config_hash"] = config_hash(canonical_config(rc));
    m["overrides"] = inv.overrides;
    m["seed"] = inv.seed;
    m["output_dir"] = inv.out_dir;
    m["exit_code"] = out.exit_code;
    nlohmann::json flags;
    if (inv.distance) flags["distance"] = *inv.distance;
    if (inv.stages) flags["stages"] = *inv.stages;
    if (inv.subcommand == "optimize") flags["exhaustive"] = inv.exhaustive;
    if (inv.subcommand == "sweep") {
        flags["start"] = inv.grid.start;
        flags["stop"] = inv.grid.stop;
        flags["step"] = inv.grid.step;
    }
    if (inv.subcommand == "eye") flags["bits"] = inv.bits;
    m["flags"] = flags.is_null() ? nlohmann::json::object() : flags;
    std::vector<std::string> files;
    for (const auto& [name, _] : out.files) files.push_back(name);
    m["outputs"] = files;
    m["timestamp"] = {{"utc", utc_now()}, {"elapsed_ms", elapsed_ms}};
    return m;
}

inline void write_file(const std::filesystem::path& p, const std::string& contents) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::io, "cannot open '" + p.string() + "' for writing");
    f << contents;
    if (!f) throw Error(ErrorCode::io, "write failed for '" + p.string() + "'");
}

/// Runs one subcommand end to end and writes its outputs. Returns the exit code.
inline int execute(const Invocation& inv, std::ostream& log = std::cout,
                   std::ostream& err = std::cerr) {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig rc;
    CommandOutput out;
    try {
        rc = load_config(inv.config_path, inv.overrides);
        if (inv.subcommand == "budget") {
            out = cmd_budget(rc, inv.distance.value_or(1000.0), inv.stages);
        } else if (inv.subcommand == "sweep") {
            out = cmd_sweep(rc, inv.grid, inv.stages);
        } else if (inv.subcommand == "optimize") {
            out = cmd_optimize(rc, inv.exhaustive);
        } else if (inv.subcommand == "eye") {
            out = cmd_eye(rc, inv.distance.value_or(1000.0), inv.stages, inv.bits, inv.seed,
                          thread_limit());
        } else {
            err << "unknown subcommand '" << inv.subcommand << "'\n";
            return exit_usage;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::io ? exit_io : exit_usage;
    }

    try {
        const std::filesystem::path dir(inv.out_dir);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw Error(ErrorCode::io, "cannot create output directory '" + inv.out_dir + "'");
        for (const auto& [name, contents] : out.files) write_file(dir / name, contents);
        write_file(dir / "config.resolved.ini", canonical_config(rc));
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        write_file(dir / "manifest.json", make_manifest(inv, rc, out, ms).dump(2) + "\n");
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_io;
    }
    log << out.summary;
    return out.exit_code;
}

inline int run(int argc, const char* const* argv) {
    CLI::App app{"Free-space optical link simulator and range optimizer", "fso-linksim"};
    app.require_subcommand(1);
    Invocation inv;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", inv.config_path, "Config file (key = value)");
        sub->add_option("--set", inv.overrides, "Override a config key: key=value")->allow_extra_args(false);
        sub->add_option("--seed", inv.seed, "Noise seed")->capture_default_str();
        sub->add_option("--out", inv.out_dir, "Output directory")->capture_default_str();
    };

    auto* budget = app.add_subcommand("budget", "Analytic link budget at one distance");
    add_common(budget);
    budget->add_option("--distance", inv.distance, "Link distance in m (default 1000)");
    budget->add_option("--stages", inv.stages, "Amplifier stages (default: fewest that meet the constraints)");

    auto* sweep = app.add_subcommand("sweep", "Analytic metrics over a distance grid");
    add_common(sweep);
    sweep->add_option("--stages", inv.stages, "Amplifier stages (default max_amplifier_stages)");
    sweep->add_option("--start", inv.grid.start, "First distance in m")->capture_default_str();
    sweep->add_option("--stop", inv.grid.stop, "Last distance in m")->capture_default_str();
    sweep->add_option("--step", inv.grid.step, "Grid step in m")->capture_default_str();

    auto* optimize = app.add_subcommand("optimize", "Maximum range for the reference weather scenarios");
    add_common(optimize);
    optimize->add_flag("--exhaustive", inv.exhaustive, "Grid scan instead of bisection");

    auto* eye = app.add_subcommand("eye", "Monte-Carlo eye diagram and counted BER");
    add_common(eye);
    eye->add_option("--distance", inv.distance, "Link distance in m (default 1000)");
    eye->add_option("--stages", inv.stages, "Amplifier stages (default: fewest that meet the constraints)");
    eye->add_option("--bits", inv.bits, "Number of bits (>= 1000)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }
    for (auto* sub : app.get_subcommands()) inv.subcommand = sub->get_name();
    return execute(inv);
}

} // namespace fso::cli
