#pragma once

// Error-rate, Q-factor and eye statistics.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "fso/core.hpp"

namespace fso {

using Bits = std::vector<std::uint8_t>;

/// Fraction of positions where the two sequences differ.
inline double ber_count(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx) {
    detail::require(!tx.empty(), "ber_count: empty bit sequence");
    detail::require(tx.size() == rx.size(), "ber_count: sequence lengths differ");
    std::size_t errors = 0;
    for (std::size_t i = 0; i < tx.size(); ++i) errors += (tx[i] != 0) != (rx[i] != 0);
    return static_cast<double>(errors) / static_cast<double>(tx.size());
}

struct SnrBer {
    double raw;   // formula value, may exceed 0.5 (even 1) at low SNR
    double value; // raw clamped to 1 for reporting

    bool above_half() const noexcept { return raw > 0.5; }
};

/// BER = 2 / (pi * SNR) * exp(-SNR / 8), evaluated as written. At low SNR the
/// expression leaves the physical range; `raw` keeps the unclamped figure.
inline SnrBer ber_from_snr(double snr) {
    detail::require(snr > 0.0 && !std::isnan(snr), "ber_from_snr: snr must be positive");
    const double raw = 2.0 / (constants::pi * snr) * std::exp(-snr / 8.0);
    return {raw, std::min(raw, 1.0)};
}

/// Smallest BER reported as a number; anything below is shown as zero.
inline constexpr double ber_floor = 1e-300;

struct BerValue {
    double value;  // 0 when clamped
    double log10;  // exact even where value underflows
    bool clamped;  // value < ber_floor, reported as ~0
};

namespace detail {

// ln(erfc(x)) for x >= 3 from the Laplace continued fraction
//   erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
// evaluated with the modified Lentz method.
inline double log_erfc_large(double x) {
    constexpr double tiny = 1e-300;
    double f = x;
    double c = x;
    double d = 0.0;
    for (int n = 1; n < 5000; ++n) {
        const double a = 0.5 * n;
        d = x + a * d;
        if (std::abs(d) < tiny) d = tiny;
        c = x + a / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return -x * x - 0.5 * std::log(constants::pi) - std::log(f);
}

} // namespace detail

/// Gaussian tail BER = 0.5 erfc(q / sqrt 2), with log10 kept accurate far
/// below the double range (Q of 40 and beyond).
inline BerValue ber_from_q(double q) {
    detail::require(q >= 0.0, "ber_from_q: q must be nonnegative");
    if (std::isinf(q)) return {0.0, -std::numeric_limits<double>::infinity(), true};
    const double x = q / std::sqrt(2.0);
    double ln_ber;
    if (x < 5.0) {
        ln_ber = std::log(0.5 * std::erfc(x));
    } else {
        ln_ber = std::log(0.5) + detail::log_erfc_large(x);
    }
    const double log10_ber = ln_ber / std::log(10.0);
    if (log10_ber < -300.0) return {0.0, log10_ber, true};
    return {std::exp(ln_ber), log10_ber, false};
}

/// Sample statistics of the decision instant, split by transmitted bit.
struct EyeDiagram {
    double mu0 = 0.0;
    double mu1 = 0.0;
    double sigma0 = 0.0;
    double sigma1 = 0.0;
    double eye_opening = 0.0; // (mu1 - 3 sigma1) - (mu0 + 3 sigma0)
    std::size_t n_traces = 0;
};

/// Q = (mu1 - mu0) / (sigma1 + sigma0). A noiseless eye throws ErrorCode::noiseless.
inline double q_factor(const EyeDiagram& eye) {
    const double s = eye.sigma0 + eye.sigma1;
    if (!(s > 0.0)) throw Error(ErrorCode::noiseless, "q_factor: zero noise, Q is unbounded");
    return (eye.mu1 - eye.mu0) / s;
}

/// Running per-class moments. Merges are order-sensitive in floating point,
/// so callers combine partial accumulators in a fixed order.
class EyeAccumulator {
public:
    void add(bool bit, double v) noexcept {
        auto& m = bit ? one_ : zero_;
        ++m.n;
        const double delta = v - m.mean;
        m.mean += delta / static_cast<double>(m.n);
        m.m2 += delta * (v - m.mean);
    }

    void merge(const EyeAccumulator& other) noexcept {
        merge_moments(zero_, other.zero_);
        merge_moments(one_, other.one_);
    }

    std::size_t count(bool bit) const noexcept { return bit ? one_.n : zero_.n; }

    /// Minimum number of samples per class accepted by finish().
    static constexpr std::size_t min_class_count = 8;

    EyeDiagram finish() const {
        detail::require(zero_.n >= min_class_count && one_.n >= min_class_count,
                        "eye: each logic level needs at least 8 samples");
        EyeDiagram e;
        e.mu0 = zero_.mean;
        e.mu1 = one_.mean;
        e.sigma0 = std::sqrt(zero_.m2 / static_cast<double>(zero_.n));
        e.sigma1 = std::sqrt(one_.m2 / static_cast<double>(one_.n));
        e.eye_opening = (e.mu1 - 3.0 * e.sigma1) - (e.mu0 + 3.0 * e.sigma0);
        e.n_traces = zero_.n + one_.n;
        return e;
    }

private:
    struct Moments {
        std::size_t n = 0;
        double mean = 0.0;
        double m2 = 0.0;
    };

    static void merge_moments(Moments& a, const Moments& b) noexcept {
        if (b.n == 0) return;
        if (a.n == 0) {
            a = b;
            return;
        }
        const double na = static_cast<double>(a.n);
        const double nb = static_cast<double>(b.n);
        const double n = na + nb;
        const double delta = b.mean - a.mean;
        a.mean += delta * nb / n;
        a.m2 += b.m2 + delta * delta * na * nb / n;
        a.n += b.n;
    }

    Moments zero_;
    Moments one_;
};

/// Eye statistics of a sampled waveform. Bit i is sampled at
/// i * samples_per_bit + sample_offset (mid-bit by default); bits whose
/// sample would fall past the end are skipped.
inline EyeDiagram build_eye(std::span<const double> samples, std::span<const std::uint8_t> bits,
                            int samples_per_bit, std::optional<std::size_t> sample_offset = {}) {
    detail::require(samples_per_bit >= 1, "build_eye: samples_per_bit must be positive");
    const auto spb = static_cast<std::size_t>(samples_per_bit);
    detail::require(samples.size() == bits.size() * spb,
                    "build_eye: waveform length must equal n_bits * samples_per_bit");
    const std::size_t offset = sample_offset.value_or(spb / 2);
    EyeAccumulator acc;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        const std::size_t k = i * spb + offset;
        if (k >= samples.size()) break;
        acc.add(bits[i] != 0, samples[k]);
    }
    return acc.finish();
}

/// Analytic link evaluation at one distance and amplifier-stage count.
struct LinkBudgetResult {
    double distance = 0.0; // m
    int stages = 0;
    double path_loss_db = 0.0;
    double rx_power = 0.0; // dBm, mean optical power at the photodetector
    double rx_power_watts = 0.0;
    double mark_current = 0.0;  // A
    double space_current = 0.0; // A
    double sigma1 = 0.0;        // A, total noise at mark level
    double sigma0 = 0.0;        // A, total noise at space level
    double snr = 0.0;           // (I1 - I0)^2 / mean(sigma1^2, sigma0^2)
    double q_factor = 0.0;
    double ber = 0.0;
    double log10_ber = 0.0;
    bool ber_clamped = false;
    double ber_snr_formula = 0.0; // ber_from_snr(snr), clamped to <= 1
};

} // namespace fso
