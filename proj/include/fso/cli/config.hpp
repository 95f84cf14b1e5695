#pragma once

// Flat `key = value` configuration files. `#` starts a comment, blank lines
// are ignored, unknown keys are errors, and `none` clears an optional key. Missing keys keep the defaults of
// LinkConfig / Constraints / SearchOptions; electrical_bandwidth and
// optical_bandwidth default to 0.75x and 4x the bit rate when not given.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fso/core.hpp"
#include "fso/optimizer.hpp"

namespace fso::cli {

struct RunConfig {
    LinkConfig link;
    Constraints constraints;
    SearchOptions search;
};

struct SourceLocation {
    std::string source; // file path or "--set"
    int line = 0;       // 0 for command-line overrides

    std::string str() const {
        return line > 0 ? source + ":" + std::to_string(line) : source;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] inline void config_error(const SourceLocation& loc, const std::string& what) {
    throw Error(ErrorCode::config, loc.str() + ": " + what);
}

inline double parse_real(std::string_view v, const SourceLocation& loc, std::string_view key) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || p != end || v.empty())
        config_error(loc, std::string(key) + ": expected a number, got '" + std::string(v) + "'");
    return out;
}

inline int parse_int(std::string_view v, const SourceLocation& loc, std::string_view key) {
    int out = 0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || p != end || v.empty())
        config_error(loc, std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
    return out;
}

inline bool parse_bool(std::string_view v, const SourceLocation& loc, std::string_view key) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    config_error(loc, std::string(key) + ": expected true/false, got '" + std::string(v) + "'");
}

using Setter = std::function<void(RunConfig&, std::string_view, const SourceLocation&)>;

struct KeySpec {
    const char* key;
    Setter set;
    std::function<std::string(const RunConfig&)> show;
};

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

#define FSO_REAL_KEY(name, member)                                                              \
    KeySpec{name,                                                                               \
            [](RunConfig& c, std::string_view v, const SourceLocation& l) {                     \
                c.member = parse_real(v, l, name);                                              \
            },                                                                                  \
            [](const RunConfig& c) { return fmt17(c.member); }}
#define FSO_INT_KEY(name, member)                                                               \
    KeySpec{name,                                                                               \
            [](RunConfig& c, std::string_view v, const SourceLocation& l) {                     \
                c.member = parse_int(v, l, name);                                               \
            },                                                                                  \
            [](const RunConfig& c) { return std::to_string(c.member); }}
#define FSO_BOOL_KEY(name, member)                                                              \
    KeySpec{name,                                                                               \
            [](RunConfig& c, std::string_view v, const SourceLocation& l) {                     \
                c.member = parse_bool(v, l, name);                                              \
            },                                                                                  \
            [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); }}

inline KeySpec weather_key(Condition cond) {
    return KeySpec{to_string(cond),
                   [cond](RunConfig& c, std::string_view v, const SourceLocation& l) {
                       if (v == "none") {
                           c.link.weather.erase(cond);
                           return;
                       }
                       const double s = parse_real(v, l, to_string(cond));
                       if (!(s >= 0.0 && s <= 1.0))
                           config_error(l, std::string(to_string(cond)) +
                                               ": severity must lie in [0, 1]");
                       c.link.weather.set(cond, s);
                   },
                   [cond](const RunConfig& c) {
                       const auto s = c.link.weather.severity(cond);
                       return s ? fmt17(*s) : std::string("none");
                   }};
}

inline const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = [] {
        std::vector<KeySpec> t = {
            FSO_REAL_KEY("tx_power", link.tx_power),
            FSO_REAL_KEY("wavelength", link.wavelength),
            FSO_REAL_KEY("bit_rate", link.bit_rate),
            FSO_REAL_KEY("tx_aperture_diameter", link.tx_aperture_diameter),
            FSO_REAL_KEY("rx_aperture_diameter", link.rx_aperture_diameter),
            FSO_REAL_KEY("beam_divergence", link.beam_divergence),
            FSO_REAL_KEY("extinction_ratio", link.extinction_ratio),
            FSO_REAL_KEY("amplifier_gain", link.amplifier_gain),
            FSO_REAL_KEY("amplifier_noise_figure", link.amplifier_noise_figure),
            FSO_INT_KEY("max_amplifier_stages", link.max_amplifier_stages),
            FSO_REAL_KEY("optical_bandwidth", link.optical_bandwidth),
            FSO_REAL_KEY("responsivity", link.responsivity),
            FSO_REAL_KEY("dark_current", link.dark_current),
            FSO_REAL_KEY("thermal_noise_psd", link.thermal_noise_psd),
            FSO_REAL_KEY("electrical_bandwidth", link.electrical_bandwidth),
            KeySpec{"attenuation_db_per_km",
                    [](RunConfig& c, std::string_view v, const SourceLocation& l) {
                        if (v == "none") {
                            c.link.attenuation_db_per_km.reset();
                            return;
                        }
                        c.link.attenuation_db_per_km = parse_real(v, l, "attenuation_db_per_km");
                    },
                    [](const RunConfig& c) {
                        return c.link.attenuation_db_per_km ? fmt17(*c.link.attenuation_db_per_km)
                                                            : std::string("none");
                    }},
            FSO_INT_KEY("samples_per_bit", link.samples_per_bit),
            FSO_INT_KEY("filter_order", link.filter_order),
            FSO_INT_KEY("prbs_register_length", link.prbs_register_length),
            FSO_BOOL_KEY("noise_enabled", link.noise_enabled),
            FSO_BOOL_KEY("refine_amplifier_gain", link.refine_amplifier_gain),
            FSO_REAL_KEY("amplifier_gain_min", link.amplifier_gain_min),
            FSO_REAL_KEY("amplifier_gain_max", link.amplifier_gain_max),
            FSO_REAL_KEY("max_ber", constraints.max_ber),
            FSO_REAL_KEY("min_rate", constraints.min_rate),
            FSO_REAL_KEY("bracket_min", search.bracket.lo),
            FSO_REAL_KEY("bracket_max", search.bracket.hi),
            FSO_REAL_KEY("tolerance", search.tolerance),
        };
        for (auto c : all_conditions) t.push_back(weather_key(c));
        return t;
    }();
    return table;
}

#undef FSO_REAL_KEY
#undef FSO_INT_KEY
#undef FSO_BOOL_KEY

inline const KeySpec* find_key(std::string_view key) {
    for (const auto& k : key_table())
        if (key == k.key) return &k;
    return nullptr;
}

} // namespace detail

/// Accumulates key/value assignments from files and overrides, then
/// resolves derived defaults and validates.
class ConfigBuilder {
public:
    void parse_text(std::string_view text, const std::string& source) {
        int line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto nl = text.find('\n', pos);
            std::string_view line =
                text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
            ++line_no;
            if (const auto hash = line.find('#'); hash != std::string_view::npos)
                line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            const SourceLocation loc{source, line_no};
            const auto eq = line.find('=');
            if (eq == std::string_view::npos)
                detail::config_error(loc, "expected 'key = value', got '" + std::string(line) + "'");
            assign(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)), loc);
        }
    }

    void parse_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(ErrorCode::io, "cannot read config file '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        parse_text(ss.str(), path);
    }

    /// Applies one `key=value` command-line override.
    void parse_override(std::string_view kv) {
        const SourceLocation loc{"--set", 0};
        const auto eq = kv.find('=');
        if (eq == std::string_view::npos)
            detail::config_error(loc, "expected key=value, got '" + std::string(kv) + "'");
        assign(detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)), loc);
    }

    RunConfig build() const {
        RunConfig c = cfg_;
        if (!seen_.count("electrical_bandwidth")) c.link.electrical_bandwidth = 0.75 * c.link.bit_rate;
        if (!seen_.count("optical_bandwidth")) c.link.optical_bandwidth = 4.0 * c.link.bit_rate;
        try {
            validate(c.link);
            validate(c.constraints);
            fso::detail::require(c.search.bracket.lo >= 0.0 && c.search.bracket.lo < c.search.bracket.hi,
                            "bracket_min must be nonnegative and below bracket_max");
            fso::detail::require(c.search.tolerance > 0.0, "tolerance must be positive");
        } catch (const Error& e) {
            const std::string msg = e.what();
            std::string key = msg.substr(0, msg.find(' '));
            if (key == "amplifier") key = "amplifier_gain_min";
            const auto it = seen_.find(key);
            const SourceLocation loc = it != seen_.end() ? it->second : SourceLocation{"defaults", 0};
            detail::config_error(loc, msg);
        }
        return c;
    }

private:
    void assign(std::string_view key, std::string_view value, const SourceLocation& loc) {
        const auto* spec = detail::find_key(key);
        if (!spec) detail::config_error(loc, "unknown key '" + std::string(key) + "'");
        if (value.empty()) detail::config_error(loc, std::string(key) + ": missing value");
        spec->set(cfg_, value, loc);
        seen_[std::string(key)] = loc;
    }

    RunConfig cfg_;
    std::map<std::string, SourceLocation> seen_;
};

/// Reads and validates a config file. An empty path yields the defaults.
inline RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
    ConfigBuilder b;
    if (!path.empty()) b.parse_file(path);
    for (const auto& o : overrides) b.parse_override(o);
    return b.build();
}

/// Every key with its resolved value, one `key = value` per line, in table order.
inline std::string canonical_config(const RunConfig& c) {
    std::string out;
    for (const auto& k : detail::key_table()) out += std::string(k.key) + " = " + k.show(c) + "\n";
    return out;
}

/// FNV-1a 64-bit, hex encoded.
inline std::string config_hash(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace fso::cli
