#pragma once

// Units, physical constants, and the configuration types shared by every
// stage of the link model. All power arithmetic inside the library is done
// in linear watts; dB and dBm appear only at the boundaries.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fso {

enum class ErrorCode {
    invalid_argument,
    no_signal,        // nonpositive power where a dB value was requested
    noiseless,        // Q undefined: zero total noise
    link_unreachable, // no amplifier path meets the constraints
    config,           // parse or validation failure in a config source
    io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

namespace constants {
inline constexpr double speed_of_light = 2.99792458e8;   // m/s
inline constexpr double planck = 6.62607015e-34;         // J s
inline constexpr double electron_charge = 1.602176634e-19; // C
inline constexpr double pi = 3.14159265358979323846;
} // namespace constants

namespace detail {

// Message is only materialized on failure; callers pass literals on hot paths.
template <class Msg>
inline void require(bool ok, Msg&& what) {
    if (!ok) throw Error(ErrorCode::invalid_argument, std::string(std::forward<Msg>(what)));
}

inline void require_finite(double v, const char* name) {
    require(std::isfinite(v), std::string(name) + " must be finite");
}

} // namespace detail

inline double dbm_to_watts(double dbm) {
    detail::require_finite(dbm, "power (dBm)");
    return 1e-3 * std::pow(10.0, dbm / 10.0);
}

inline double watts_to_dbm(double watts) {
    if (!(watts > 0.0) || !std::isfinite(watts))
        throw Error(ErrorCode::no_signal, "no signal: power must be positive to express in dBm");
    return 10.0 * std::log10(watts / 1e-3);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

/// Optical carrier frequency in Hz for a wavelength given in nanometres.
inline double optical_frequency(double wavelength_nm) {
    detail::require(wavelength_nm > 0.0 && std::isfinite(wavelength_nm),
                    "wavelength must be positive");
    return constants::speed_of_light / (wavelength_nm * 1e-9);
}

// ---------------------------------------------------------------------------
// Weather

enum class Condition { haze, rain, mist, snow, fog };

inline constexpr Condition all_conditions[] = {Condition::haze, Condition::rain, Condition::mist,
                                               Condition::snow, Condition::fog};

inline const char* to_string(Condition c) {
    switch (c) {
    case Condition::haze: return "haze";
    case Condition::rain: return "rain";
    case Condition::mist: return "mist";
    case Condition::snow: return "snow";
    case Condition::fog: return "fog";
    }
    return "?";
}

/// Set of weather components, at most one per condition. Empty means clear air.
class WeatherSpec {
public:
    struct Component {
        Condition condition;
        double severity;
    };

    WeatherSpec() = default;

    WeatherSpec(std::initializer_list<Component> components) {
        for (const auto& c : components) set(c.condition, c.severity);
    }

    /// Adds or replaces the entry for `condition`.
    void set(Condition condition, double severity) {
        detail::require(severity >= 0.0 && severity <= 1.0,
                        std::string("severity for ") + to_string(condition) +
                            " must lie in [0, 1]");
        for (auto& c : components_) {
            if (c.condition == condition) {
                c.severity = severity;
                return;
            }
        }
        components_.push_back({condition, severity});
    }

    void erase(Condition condition) {
        std::erase_if(components_, [&](const Component& c) { return c.condition == condition; });
    }

    std::optional<double> severity(Condition condition) const {
        for (const auto& c : components_)
            if (c.condition == condition) return c.severity;
        return std::nullopt;
    }

    const std::vector<Component>& components() const noexcept { return components_; }
    bool empty() const noexcept { return components_.empty(); }

private:
    std::vector<Component> components_;
};

// ---------------------------------------------------------------------------
// Link configuration

/// Full parameterization of transmitter, path geometry, amplifier chain,
/// receiver, and simulation knobs. Defaults follow the 10 Gbit/s, 1550 nm,
/// 60 dBm reference setup. The 60 dBm (1 kW) laser power is far above any CW
/// telecom source and is kept only because the reference setup states it.
struct LinkConfig {
    double tx_power = 60.0;   // dBm
    double wavelength = 1550; // nm
    double bit_rate = 1e10;   // bit/s

    double tx_aperture_diameter = 0.05; // m
    double rx_aperture_diameter = 0.20; // m
    double beam_divergence = 2e-3;      // rad, full angle; 0 disables spreading
    double extinction_ratio = 10.0;     // dB

    double amplifier_gain = 20.0;        // dB per stage
    double amplifier_noise_figure = 4.0; // dB per stage
    int max_amplifier_stages = 2;
    double optical_bandwidth = 4e10; // Hz, ASE bandwidth seen by the detector

    double responsivity = 1.0;        // A/W
    double dark_current = 10e-9;      // A
    double thermal_noise_psd = 1e-22; // A^2/Hz
    double electrical_bandwidth = 7.5e9; // Hz

    WeatherSpec weather;
    /// Replaces the weather sum with a fixed dB/km figure when set.
    std::optional<double> attenuation_db_per_km;

    // Waveform tier
    int samples_per_bit = 16;
    int filter_order = 4;
    int prbs_register_length = 7;
    bool noise_enabled = true;

    // Optional gain refinement after stage selection
    bool refine_amplifier_gain = false;
    double amplifier_gain_min = 0.0;  // dB
    double amplifier_gain_max = 30.0; // dB

    /// Low-pass cutoff used by the waveform tier.
    double filter_cutoff() const noexcept { return electrical_bandwidth; }
};

/// Throws Error(invalid_argument) naming the first violated field.
inline void validate(const LinkConfig& c) {
    using detail::require;
    auto finite_positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    require(std::isfinite(c.tx_power), "tx_power must be finite");
    require(finite_positive(c.wavelength), "wavelength must be positive");
    require(finite_positive(c.bit_rate), "bit_rate must be positive");
    require(finite_positive(c.tx_aperture_diameter), "tx_aperture_diameter must be positive");
    require(finite_positive(c.rx_aperture_diameter), "rx_aperture_diameter must be positive");
    require(std::isfinite(c.beam_divergence) && c.beam_divergence >= 0.0,
            "beam_divergence must be nonnegative");
    require(finite_positive(c.extinction_ratio), "extinction_ratio must be positive (dB)");
    require(std::isfinite(c.amplifier_gain) && c.amplifier_gain >= 0.0,
            "amplifier_gain must be nonnegative (dB)");
    require(std::isfinite(c.amplifier_noise_figure) && c.amplifier_noise_figure >= 0.0,
            "amplifier_noise_figure must be nonnegative (dB)");
    require(c.max_amplifier_stages >= 0 && c.max_amplifier_stages <= 8,
            "max_amplifier_stages must lie in [0, 8]");
    require(finite_positive(c.optical_bandwidth), "optical_bandwidth must be positive");
    require(finite_positive(c.responsivity), "responsivity must be positive");
    require(std::isfinite(c.dark_current) && c.dark_current >= 0.0,
            "dark_current must be nonnegative");
    require(std::isfinite(c.thermal_noise_psd) && c.thermal_noise_psd >= 0.0,
            "thermal_noise_psd must be nonnegative");
    require(finite_positive(c.electrical_bandwidth), "electrical_bandwidth must be positive");
    if (c.attenuation_db_per_km)
        require(std::isfinite(*c.attenuation_db_per_km) && *c.attenuation_db_per_km >= 0.0,
                "attenuation_db_per_km must be nonnegative");
    require(c.samples_per_bit >= 2, "samples_per_bit must be at least 2");
    require(c.filter_order >= 1 && c.filter_order <= 8, "filter_order must lie in [1, 8]");
    require(c.electrical_bandwidth < 0.5 * c.bit_rate * c.samples_per_bit,
            "electrical_bandwidth must be below the waveform Nyquist rate");
    require(c.prbs_register_length >= 3 && c.prbs_register_length <= 31,
            "prbs_register_length must lie in [3, 31]");
    require(std::isfinite(c.amplifier_gain_min) && std::isfinite(c.amplifier_gain_max) &&
                c.amplifier_gain_min >= 0.0 && c.amplifier_gain_min <= c.amplifier_gain_max,
            "amplifier gain bounds must satisfy 0 <= amplifier_gain_min <= amplifier_gain_max");
}

/// Service requirements: BER ceiling and data-rate floor.
struct Constraints {
    double max_ber = 1e-9;
    double min_rate = 1e10; // bit/s
};

inline void validate(const Constraints& c) {
    detail::require(c.max_ber > 0.0 && c.max_ber <= 1.0, "max_ber must lie in (0, 1]");
    detail::require(std::isfinite(c.min_rate) && c.min_rate >= 0.0,
                    "min_rate must be nonnegative");
}

} // namespace fso
