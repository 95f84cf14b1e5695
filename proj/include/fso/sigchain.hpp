#pragma once

// Transmitter, amplifier and receiver component models, plus the analytic
// link-budget evaluation built on them.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "fso/channel.hpp"
#include "fso/core.hpp"
#include "fso/metrics.hpp"

namespace fso {

// ---------------------------------------------------------------------------
// Pulse generator

namespace detail {

// Feedback taps (1-based register positions) of a maximal-length Fibonacci
// LFSR for register lengths 3..31.
inline constexpr std::array<std::array<int, 4>, 32> prbs_taps = {{
    {}, {}, {},
    {3, 2},         {4, 3},         {5, 3},         {6, 5},         {7, 6},
    {8, 6, 5, 4},   {9, 5},         {10, 7},        {11, 9},        {12, 6, 4, 1},
    {13, 4, 3, 1},  {14, 5, 3, 1},  {15, 14},       {16, 15, 13, 4}, {17, 14},
    {18, 11},       {19, 6, 2, 1},  {20, 17},       {21, 19},       {22, 21},
    {23, 18},       {24, 23, 22, 17}, {25, 22},     {26, 6, 2, 1},  {27, 5, 2, 1},
    {28, 25},       {29, 27},       {30, 6, 4, 1},  {31, 28},
}};

} // namespace detail

/// Maximal-length pseudo-random binary sequence, period 2^register_length - 1.
/// The low register_length bits of `seed` form the initial state.
inline Bits generate_prbs(int register_length, std::size_t n_bits, std::uint64_t seed) {
    detail::require(register_length >= 3 && register_length <= 31,
                    "generate_prbs: register_length must lie in [3, 31]");
    detail::require(n_bits >= 1, "generate_prbs: n_bits must be at least 1");
    const std::uint64_t mask = (std::uint64_t{1} << register_length) - 1;
    std::uint64_t state = seed & mask;
    detail::require(state != 0, "generate_prbs: seed leaves the register all-zero");

    std::uint64_t tap_mask = 0;
    for (int t : detail::prbs_taps.at(static_cast<std::size_t>(register_length)))
        if (t > 0) tap_mask |= std::uint64_t{1} << (t - 1);

    Bits out(n_bits);
    for (auto& b : out) {
        b = static_cast<std::uint8_t>((state >> (register_length - 1)) & 1u);
        const auto fb = static_cast<std::uint64_t>(__builtin_parityll(state & tap_mask));
        state = ((state << 1) | fb) & mask;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Waveforms

enum class SignalDomain { drive, optical_power, photocurrent };

struct Waveform {
    std::vector<double> samples;
    double sample_rate = 0.0; // Hz
    int samples_per_bit = 0;
    SignalDomain domain = SignalDomain::drive;

    std::size_t size() const noexcept { return samples.size(); }

    double mean() const noexcept {
        if (samples.empty()) return 0.0;
        double s = 0.0;
        for (double v : samples) s += v;
        return s / static_cast<double>(samples.size());
    }
};

/// Holds each bit for samples_per_bit samples at `high` (1) or `low` (0).
inline Waveform nrz_encode(std::span<const std::uint8_t> bits, int samples_per_bit, double high,
                           double low, double bit_rate = 1e10) {
    detail::require(samples_per_bit >= 2, "nrz_encode: samples_per_bit must be at least 2");
    detail::require(high > low && low >= 0.0, "nrz_encode: need high > low >= 0");
    detail::require(bit_rate > 0.0, "nrz_encode: bit_rate must be positive");
    Waveform w;
    w.sample_rate = bit_rate * samples_per_bit;
    w.samples_per_bit = samples_per_bit;
    w.samples.reserve(bits.size() * static_cast<std::size_t>(samples_per_bit));
    for (auto b : bits) w.samples.insert(w.samples.end(), samples_per_bit, b ? high : low);
    return w;
}

// ---------------------------------------------------------------------------
// CW laser and intensity modulator

/// Largest extinction ratio honoured; beyond this the space level is zero
/// to double precision anyway.
inline constexpr double max_extinction_ratio_db = 200.0;

struct OpticalLevels {
    double mark;  // W
    double space; // W
};

/// Mark/space powers for a given mean power over an equiprobable pattern.
inline OpticalLevels modulator_levels(double avg_power, double extinction_ratio_db) {
    detail::require(avg_power >= 0.0 && std::isfinite(avg_power),
                    "modulator: average power must be nonnegative");
    detail::require(extinction_ratio_db > 0.0, "modulator: extinction ratio must be positive");
    const double inv_er = std::pow(10.0, -std::min(extinction_ratio_db, max_extinction_ratio_db) / 10.0);
    const double mark = 2.0 * avg_power / (1.0 + inv_er);
    return {mark, mark * inv_er};
}

/// Maps a {0,1} drive waveform onto optical mark/space powers.
inline Waveform laser_modulate(const Waveform& drive, double avg_power, double extinction_ratio_db) {
    detail::require(avg_power > 0.0, "laser_modulate: average power must be positive");
    const auto levels = modulator_levels(avg_power, extinction_ratio_db);
    Waveform out = drive;
    out.domain = SignalDomain::optical_power;
    for (double& v : out.samples) {
        if (v == 1.0)
            v = levels.mark;
        else if (v == 0.0)
            v = levels.space;
        else
            throw Error(ErrorCode::invalid_argument, "laser_modulate: drive must be binary {0, 1}");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Optical amplifier

struct AmplifierOutput {
    double power;     // W
    double ase_psd;   // W/Hz per polarization, added by this stage
    double ase_power; // W, both polarizations over the optical bandwidth
};

/// One linear amplifier stage: P_out = G P_in, rho_ase = (F G - 1) h nu / 2.
inline AmplifierOutput amplify(double input_power, double gain_db, double noise_figure_db,
                               double center_frequency, double optical_bandwidth) {
    detail::require(gain_db >= 0.0, "amplify: gain must be nonnegative (dB)");
    detail::require(noise_figure_db >= 0.0, "amplify: noise figure must be nonnegative (dB)");
    detail::require(input_power >= 0.0, "amplify: input power must be nonnegative");
    const double g = db_to_linear(gain_db);
    const double f = db_to_linear(noise_figure_db);
    const double psd = std::max(0.0, f * g - 1.0) * constants::planck * center_frequency / 2.0;
    return {g * input_power, psd, 2.0 * psd * optical_bandwidth};
}

/// Scales every sample of an optical waveform; returns the stage ASE density.
inline double amplify(Waveform& optical, double gain_db, double noise_figure_db,
                      double center_frequency, double optical_bandwidth) {
    const auto stage = amplify(0.0, gain_db, noise_figure_db, center_frequency, optical_bandwidth);
    const double g = db_to_linear(gain_db);
    for (double& v : optical.samples) v *= g;
    return stage.ase_psd;
}

/// Net effect of `stages` identical amplifiers in cascade.
struct AmplifierChain {
    double gain = 1.0;    // linear, total
    double ase_psd = 0.0; // W/Hz at the chain output

    static AmplifierChain cascade(int stages, const LinkConfig& cfg) {
        AmplifierChain chain;
        const double nu = optical_frequency(cfg.wavelength);
        for (int k = 0; k < stages; ++k) {
            const auto s = amplify(1.0, cfg.amplifier_gain, cfg.amplifier_noise_figure, nu,
                                   cfg.optical_bandwidth);
            chain.gain *= s.power;
            chain.ase_psd = s.power * chain.ase_psd + s.ase_psd;
        }
        return chain;
    }
};

// ---------------------------------------------------------------------------
// Photodetector

struct NoiseBudget {
    double shot_variance = 0.0;     // A^2
    double thermal_variance = 0.0;  // A^2
    double ase_beat_variance = 0.0; // A^2, signal x ASE

    double total() const noexcept { return shot_variance + thermal_variance + ase_beat_variance; }
};

/// Noise at photocurrent `current` (A) for ASE density `ase_psd` (W/Hz).
inline NoiseBudget receiver_noise(double current, const LinkConfig& cfg, double ase_psd) {
    const double be = cfg.electrical_bandwidth;
    NoiseBudget nb;
    nb.shot_variance = 2.0 * constants::electron_charge * (current + cfg.dark_current) * be;
    nb.thermal_variance = cfg.thermal_noise_psd * be;
    // 4 R^2 P rho B with R P = I
    nb.ase_beat_variance = 4.0 * cfg.responsivity * current * ase_psd * be;
    return nb;
}

struct Detection {
    double current; // A
    NoiseBudget noise;
};

inline Detection photodetect(double optical_power, const LinkConfig& cfg, double ase_psd) {
    detail::require(optical_power >= 0.0, "photodetect: optical power must be nonnegative");
    const double i = cfg.responsivity * optical_power;
    return {i, receiver_noise(i, cfg, ase_psd)};
}

/// Converts an optical waveform to photocurrent in place (noise-free).
inline void photodetect(Waveform& optical, const LinkConfig& cfg) {
    for (double& v : optical.samples) {
        detail::require(v >= 0.0, "photodetect: optical power must be nonnegative");
        v *= cfg.responsivity;
    }
    optical.domain = SignalDomain::photocurrent;
}

// ---------------------------------------------------------------------------
// Low-pass filter

namespace detail {

// Roots of the reverse Bessel polynomial of the given order, rescaled so the
// magnitude response is -3 dB at 1 rad/s.
inline std::vector<std::complex<double>> bessel_poles(int order) {
    using cd = std::complex<double>;
    // coefficients a_k of theta_n(s) = sum a_k s^k
    std::vector<double> a(order + 1);
    auto fact = [](int n) {
        double f = 1.0;
        for (int i = 2; i <= n; ++i) f *= i;
        return f;
    };
    for (int k = 0; k <= order; ++k)
        a[k] = fact(2 * order - k) / (std::pow(2.0, order - k) * fact(k) * fact(order - k));

    auto poly = [&](cd s) {
        cd v = a[order];
        for (int k = order - 1; k >= 0; --k) v = v * s + a[k];
        return v;
    };

    // Durand-Kerner on the monic polynomial
    std::vector<cd> roots(order);
    const cd seed(0.4, 0.9);
    for (int i = 0; i < order; ++i) roots[i] = std::pow(seed, i) * 1.5;
    for (int iter = 0; iter < 2000; ++iter) {
        double change = 0.0;
        for (int i = 0; i < order; ++i) {
            cd denom = a[order];
            for (int j = 0; j < order; ++j)
                if (j != i) denom *= roots[i] - roots[j];
            const cd step = poly(roots[i]) / denom;
            roots[i] -= step;
            change = std::max(change, std::abs(step));
        }
        if (change < 1e-15) break;
    }

    // |H(jw)|^2 = a0^2 / |theta(jw)|^2 is monotone; bisect for the -3 dB point.
    auto mag2 = [&](double w) { return a[0] * a[0] / std::norm(poly(cd(0.0, w))); };
    double lo = 0.0, hi = 10.0 * order;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mag2(mid) > 0.5 ? lo : hi) = mid;
    }
    const double w3 = 0.5 * (lo + hi);
    for (auto& r : roots) r /= w3;
    return roots;
}

} // namespace detail

/// Bessel-type low-pass IIR obtained by the prewarped bilinear transform of
/// the analog prototype: unity DC gain, -3 dB at the cutoff.
class LowpassFilter {
public:
    LowpassFilter(double cutoff, double sample_rate, int order) {
        detail::require(order >= 1 && order <= 8, "lowpass_filter: order must lie in [1, 8]");
        detail::require(cutoff > 0.0 && cutoff < 0.5 * sample_rate,
                        "lowpass_filter: cutoff must lie in (0, sample_rate / 2)");
        const double fs2 = 2.0 * sample_rate;
        const double omega = fs2 * std::tan(constants::pi * cutoff / sample_rate);
        for (const auto& p : detail::bessel_poles(order)) {
            if (p.imag() < -1e-12) continue; // conjugate of a pair handled below
            const auto s = omega * p;
            const auto z = (fs2 + s) / (fs2 - s);
            Section sec;
            if (std::abs(p.imag()) <= 1e-12) {
                // first order: g (1 + z^-1) / (1 - zr z^-1)
                const double g = (1.0 - z.real()) / 2.0;
                sec = {g, g, 0.0, -z.real(), 0.0};
                pole_radius_ = std::max(pole_radius_, std::abs(z.real()));
            } else {
                const double a1 = -2.0 * z.real();
                const double a2 = std::norm(z);
                const double g = (1.0 + a1 + a2) / 4.0;
                sec = {g, 2.0 * g, g, a1, a2};
                pole_radius_ = std::max(pole_radius_, std::abs(z));
            }
            sections_.push_back(sec);
        }
        sample_rate_ = sample_rate;
    }

    double step(double x) noexcept {
        for (auto& s : sections_) {
            const double y = s.b0 * x + s.z1;
            s.z1 = s.b1 * x - s.a1 * y + s.z2;
            s.z2 = s.b2 * x - s.a2 * y;
            x = y;
        }
        return x;
    }

    void process(std::span<double> samples) noexcept {
        for (double& v : samples) v = step(v);
    }

    void reset() noexcept {
        for (auto& s : sections_) s.z1 = s.z2 = 0.0;
    }

    /// Sets the state to the steady state of a constant input x.
    void prime(double x) noexcept {
        for (auto& s : sections_) {
            s.z2 = (s.b2 - s.a2) * x;
            s.z1 = (s.b1 - s.a1) * x + s.z2;
        }
    }

    /// |H(e^{j 2 pi f / fs})|
    double magnitude(double frequency) const {
        const auto z1 = std::polar(1.0, -2.0 * constants::pi * frequency / sample_rate_);
        std::complex<double> h = 1.0;
        for (const auto& s : sections_)
            h *= (s.b0 + s.b1 * z1 + s.b2 * z1 * z1) / (1.0 + s.a1 * z1 + s.a2 * z1 * z1);
        return std::abs(h);
    }

    std::vector<double> impulse_response(std::size_t n) const {
        LowpassFilter f = *this;
        f.reset();
        std::vector<double> h(n);
        for (std::size_t i = 0; i < n; ++i) h[i] = f.step(i == 0 ? 1.0 : 0.0);
        return h;
    }

    /// Output variance per unit of white input variance (sum of h^2).
    double noise_gain() const {
        double s = 0.0;
        for (double v : impulse_response(settle_length())) s += v * v;
        return s;
    }

    /// DC group delay in samples (centroid of the impulse response).
    double group_delay() const {
        const auto h = impulse_response(settle_length());
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) {
            num += static_cast<double>(i) * h[i];
            den += h[i];
        }
        return num / den;
    }

    double sample_rate() const noexcept { return sample_rate_; }

private:
    struct Section {
        double b0, b1, b2, a1, a2;
        double z1 = 0.0, z2 = 0.0;
    };

    std::size_t settle_length() const {
        // slowest pole decays to 1e-30
        const double r = pole_radius_;
        const double n = r > 0.0 && r < 1.0 ? 69.0 / -std::log(r) : 64.0;
        return static_cast<std::size_t>(std::max(64.0, std::ceil(n))) + 1;
    }

    std::vector<Section> sections_;
    double sample_rate_ = 0.0;
    double pole_radius_ = 0.0;
};

/// Filters a waveform, starting from the steady state of its first sample.
inline Waveform lowpass_filter(const Waveform& signal, double cutoff, int order) {
    LowpassFilter f(cutoff, signal.sample_rate, order);
    Waveform out = signal;
    if (!out.samples.empty()) f.prime(out.samples.front());
    f.process(out.samples);
    return out;
}

// ---------------------------------------------------------------------------
// Analytic tier

/// End-to-end link at one distance with `stages` cascaded receive-side
/// amplifiers. Noise is referred to the photocurrent.
inline LinkBudgetResult evaluate_link(const LinkConfig& cfg, double distance, int stages) {
    detail::require(distance >= 0.0, "evaluate_link: distance must be nonnegative");
    detail::require(stages >= 0 && stages <= cfg.max_amplifier_stages,
                    "evaluate_link: stages must lie in [0, max_amplifier_stages]");

    LinkBudgetResult r;
    r.distance = distance;
    r.stages = stages;
    r.path_loss_db = path_loss(distance, cfg).total_db();

    const auto chain = AmplifierChain::cascade(stages, cfg);
    const double p_avg = dbm_to_watts(cfg.tx_power) * std::pow(10.0, -r.path_loss_db / 10.0) * chain.gain;
    r.rx_power_watts = p_avg;
    r.rx_power = p_avg > 0.0 ? watts_to_dbm(p_avg) : -std::numeric_limits<double>::infinity();

    const auto levels = modulator_levels(p_avg, cfg.extinction_ratio);
    const auto mark = photodetect(levels.mark, cfg, chain.ase_psd);
    const auto space = photodetect(levels.space, cfg, chain.ase_psd);
    r.mark_current = mark.current;
    r.space_current = space.current;
    r.sigma1 = std::sqrt(mark.noise.total());
    r.sigma0 = std::sqrt(space.noise.total());

    const double swing = mark.current - space.current;
    const double sigma_sum = r.sigma1 + r.sigma0;
    r.q_factor = sigma_sum > 0.0 ? swing / sigma_sum
                                 : (swing > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    const auto ber = ber_from_q(std::max(0.0, r.q_factor));
    r.ber = ber.value;
    r.log10_ber = ber.log10;
    r.ber_clamped = ber.clamped;

    const double mean_var = 0.5 * (mark.noise.total() + space.noise.total());
    r.snr = mean_var > 0.0 ? swing * swing / mean_var
                           : (swing > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    r.ber_snr_formula = r.snr > 0.0 ? ber_from_snr(r.snr).value : 1.0;
    return r;
}

} // namespace fso
