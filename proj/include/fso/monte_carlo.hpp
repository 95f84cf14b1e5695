#pragma once

// Sampled-waveform tier: PRBS -> NRZ -> laser -> channel -> amplifiers ->
// photodetector (+ Gaussian noise) -> low-pass -> mid-bit decision.
//
// The bit stream is cut into fixed-size blocks. Noise for sample k of block b
// comes from a counter-based generator keyed by hash(seed, b), and each block
// re-filters a short warm-up tail of its predecessor, so the outcome does not
// depend on how blocks are assigned to threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <span>
#include <thread>
#include <vector>

#include "fso/channel.hpp"
#include "fso/core.hpp"
#include "fso/metrics.hpp"
#include "fso/sigchain.hpp"

namespace fso {

namespace detail {

inline constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t block_key(std::uint64_t seed, std::uint64_t block) noexcept {
    return mix64(mix64(seed + golden_gamma) ^ (block * golden_gamma + 0x632be59bd9b4e019ULL));
}

/// Uniform in (0, 1), 53-bit resolution, never exactly 0.
inline double to_unit(std::uint64_t v) noexcept {
    return (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal pair for counter `pair` within a keyed stream (Box-Muller).
inline void normal_pair(std::uint64_t key, std::uint64_t pair, double& a, double& b) noexcept {
    const double u1 = to_unit(mix64(key + (2 * pair + 1) * golden_gamma));
    const double u2 = to_unit(mix64(key + (2 * pair + 2) * golden_gamma));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * constants::pi * u2;
    a = r * std::cos(t);
    b = r * std::sin(t);
}

} // namespace detail

struct MonteCarloOptions {
    std::size_t n_bits = 1u << 20;
    std::uint64_t seed = 42;
    unsigned threads = 0;              // 0: hardware concurrency
    std::size_t block_bits = 1u << 16; // fixed; part of the result's identity
    std::size_t capture_traces = 0;    // keep one bit-period window for the first N bits
};

struct MonteCarloResult {
    EyeDiagram eye;
    std::size_t errors = 0;
    double ber = 0.0; // counted
    Bits tx_bits;
    Bits rx_bits;
    double threshold = 0.0;           // A
    std::size_t decision_offset = 0;  // samples from bit start to decision instant
    LinkBudgetResult analytic;        // same chain, analytic tier
    /// capture_traces x samples_per_bit photocurrent values, row-major. Each
    /// window is centred on the decision instant of its bit.
    std::vector<double> traces;
    std::size_t trace_count = 0;
};

namespace detail {

inline constexpr std::size_t warmup_bits = 64;

struct BlockOutcome {
    EyeAccumulator eye;
    std::size_t errors = 0;
};

} // namespace detail

inline MonteCarloResult run_monte_carlo(const LinkConfig& cfg, double distance, int stages,
                                        const MonteCarloOptions& opt) {
    validate(cfg);
    detail::require(opt.n_bits >= 1000, "run_monte_carlo: n_bits must be at least 1000");
    detail::require(opt.block_bits >= 1, "run_monte_carlo: block_bits must be positive");

    MonteCarloResult res;
    res.analytic = evaluate_link(cfg, distance, stages);

    const int spb = cfg.samples_per_bit;
    const auto uspb = static_cast<std::size_t>(spb);
    const double fs = cfg.bit_rate * spb;
    const LowpassFilter proto(cfg.filter_cutoff(), fs, cfg.filter_order);
    const double noise_scale = 1.0 / std::sqrt(proto.noise_gain());
    const auto delay = static_cast<std::size_t>(std::lround(proto.group_delay()));
    res.decision_offset = uspb / 2 + delay;
    // Threshold that equalizes the two Gaussian tails, the one the Q mapping assumes.
    const auto& a = res.analytic;
    res.threshold = a.sigma0 + a.sigma1 > 0.0
                        ? (a.sigma0 * a.mark_current + a.sigma1 * a.space_current) / (a.sigma0 + a.sigma1)
                        : 0.5 * (a.mark_current + a.space_current);

    // Bits past n_bits feed the decision instants of the last bits.
    const std::size_t lookahead = res.decision_offset / uspb + 2;
    Bits stream = generate_prbs(cfg.prbs_register_length, opt.n_bits + lookahead,
                                (std::uint64_t{1} << cfg.prbs_register_length) - 1);
    res.tx_bits.assign(stream.begin(), stream.begin() + static_cast<std::ptrdiff_t>(opt.n_bits));
    res.rx_bits.assign(opt.n_bits, 0);

    const std::size_t capture = std::min(opt.capture_traces, opt.n_bits);
    res.trace_count = capture;
    res.traces.assign(capture * uspb, 0.0);

    const double tx_avg = dbm_to_watts(cfg.tx_power);
    const double transmission = std::pow(10.0, -path_loss(distance, cfg).total_db() / 10.0);
    const double nu = optical_frequency(cfg.wavelength);
    const std::size_t block_samples = opt.block_bits * uspb;

    const std::size_t n_blocks = (opt.n_bits + opt.block_bits - 1) / opt.block_bits;
    std::vector<detail::BlockOutcome> outcomes(n_blocks);

    auto run_block = [&](std::size_t b) {
        const std::size_t first = b * opt.block_bits;
        const std::size_t last = std::min(first + opt.block_bits, opt.n_bits);
        const std::size_t lo = first >= detail::warmup_bits ? first - detail::warmup_bits : 0;
        const std::size_t hi = last + lookahead;
        const std::span<const std::uint8_t> bits(stream.data() + lo, hi - lo);

        Waveform w = nrz_encode(bits, spb, 1.0, 0.0, cfg.bit_rate);
        w = laser_modulate(w, tx_avg, cfg.extinction_ratio);
        for (double& v : w.samples) v *= transmission;
        double ase_psd = 0.0;
        for (int k = 0; k < stages; ++k) {
            const double g = db_to_linear(cfg.amplifier_gain);
            ase_psd = g * ase_psd + amplify(w, cfg.amplifier_gain, cfg.amplifier_noise_figure, nu,
                                            cfg.optical_bandwidth);
        }
        photodetect(w, cfg);

        if (cfg.noise_enabled) {
            // Global sample index g lives in noise block g / block_samples.
            const std::size_t g0 = lo * uspb;
            std::size_t i = 0;
            while (i < w.samples.size()) {
                const std::size_t g = g0 + i;
                const std::size_t nb = g / block_samples;
                const std::size_t in_block = g % block_samples;
                const std::uint64_t key = detail::block_key(opt.seed, nb);
                const std::size_t run =
                    std::min(w.samples.size() - i, block_samples - in_block);
                double za = 0.0, zb = 0.0;
                if (in_block & 1u) detail::normal_pair(key, in_block / 2, za, zb);
                for (std::size_t j = 0; j < run; ++j) {
                    const std::size_t local = in_block + j;
                    if (!(local & 1u)) detail::normal_pair(key, local / 2, za, zb);
                    const double z = (local & 1u) ? zb : za;
                    double& v = w.samples[i + j];
                    const double var = receiver_noise(v, cfg, ase_psd).total();
                    v += z * std::sqrt(var) * noise_scale;
                }
                i += run;
            }
        }

        LowpassFilter filt = proto;
        filt.prime(w.samples.front());
        filt.process(w.samples);

        auto& out = outcomes[b];
        for (std::size_t bit = first; bit < last; ++bit) {
            const std::size_t k = (bit - lo) * uspb + res.decision_offset;
            const double y = w.samples[k];
            const bool tx = stream[bit] != 0;
            const bool rx = y > res.threshold;
            out.eye.add(tx, y);
            out.errors += tx != rx;
            res.rx_bits[bit] = rx;
            if (bit < capture) {
                const std::size_t start = k - uspb / 2;
                std::copy_n(w.samples.begin() + static_cast<std::ptrdiff_t>(start), uspb,
                            res.traces.begin() + static_cast<std::ptrdiff_t>(bit * uspb));
            }
        }
    };

    unsigned n_threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, n_blocks));
    if (n_threads <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        std::exception_ptr failure;
        std::atomic<bool> failed{false};
        for (unsigned t = 0; t < n_threads; ++t) {
            pool.emplace_back([&] {
                try {
                    for (std::size_t b; (b = next.fetch_add(1)) < n_blocks;) run_block(b);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            });
        }
        pool.clear();
        if (failure) std::rethrow_exception(failure);
    }

    EyeAccumulator eye;
    for (const auto& o : outcomes) {
        eye.merge(o.eye);
        res.errors += o.errors;
    }
    res.eye = eye.finish();
    res.ber = static_cast<double>(res.errors) / static_cast<double>(opt.n_bits);
    return res;
}

} // namespace fso
