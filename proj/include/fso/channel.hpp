#pragma once

// Atmospheric attenuation per weather condition and geometric beam-spreading
// loss for the free-space path.

#include <algorithm>
#include <cmath>

#include "fso/core.hpp"

namespace fso {

struct AttenuationRange {
    double lo; // dB/km at severity 0
    double hi; // dB/km at severity 1
};

/// Measured attenuation span for each condition. Snow and fog are single-valued.
constexpr AttenuationRange attenuation_range(Condition c) {
    switch (c) {
    case Condition::haze: return {10.94, 20.68};
    case Condition::rain: return {6.0, 30.0};
    case Condition::mist: return {28.56, 31.45};
    case Condition::snow: return {40.0, 40.0};
    case Condition::fog: return {70.0, 70.0};
    }
    return {0.0, 0.0};
}

/// dB/km for one condition, interpolated linearly across its range.
inline double weather_attenuation(Condition c, double severity) {
    detail::require(severity >= 0.0 && severity <= 1.0, "severity must lie in [0, 1]");
    const auto r = attenuation_range(c);
    return r.lo + severity * (r.hi - r.lo);
}

/// Sum of the present components; clear air is 0 dB/km.
inline double total_attenuation(const WeatherSpec& weather) {
    double sum = 0.0;
    for (const auto& comp : weather.components())
        sum += weather_attenuation(comp.condition, comp.severity);
    return sum;
}

/// Attenuation actually applied by the channel: the explicit override if the
/// config has one, otherwise the weather sum.
inline double atmospheric_attenuation(const LinkConfig& cfg) {
    return cfg.attenuation_db_per_km ? *cfg.attenuation_db_per_km : total_attenuation(cfg.weather);
}

/// Aperture-ratio spreading loss, clamped at 0 dB.
inline double geometric_loss(double distance_m, const LinkConfig& cfg) {
    detail::require(distance_m >= 0.0, "distance must be nonnegative");
    const double spot = cfg.tx_aperture_diameter + cfg.beam_divergence * distance_m;
    return std::max(0.0, 20.0 * std::log10(spot / cfg.rx_aperture_diameter));
}

struct PathLoss {
    double atmospheric_db = 0.0;
    double geometric_db = 0.0;

    double total_db() const noexcept { return atmospheric_db + geometric_db; }
};

inline PathLoss path_loss(double distance_m, const LinkConfig& cfg) {
    detail::require(distance_m >= 0.0, "distance must be nonnegative");
    return {atmospheric_attenuation(cfg) * distance_m / 1000.0, geometric_loss(distance_m, cfg)};
}

} // namespace fso
