#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "fso/metrics.hpp"

using namespace fso;
using hp = boost::multiprecision::cpp_bin_float_50;

namespace {

// 50-digit reference for log10(0.5 erfc(q / sqrt 2)).
double oracle_log10_ber(double q) {
    const hp x = hp(q) / boost::multiprecision::sqrt(hp(2));
    return static_cast<double>(boost::multiprecision::log10(boost::math::erfc(x) / 2));
}

} // namespace

TEST(BerCount, Definition) {
    Bits a(1000, 0), b(1000, 0);
    EXPECT_EQ(ber_count(a, b), 0.0);
    for (int i = 0; i < 5; ++i) b[i * 100 + 3] = 1;
    EXPECT_DOUBLE_EQ(ber_count(a, b), 0.005);
    Bits c(1000, 1);
    EXPECT_EQ(ber_count(a, c), 1.0);
}

TEST(BerCount, Errors) {
    Bits a(10, 0), b(11, 0), empty;
    EXPECT_THROW(ber_count(a, b), Error);
    EXPECT_THROW(ber_count(empty, empty), Error);
}

TEST(BerCount, PermutationInvariantAndBounded) {
    std::mt19937 rng(3);
    std::bernoulli_distribution coin(0.3);
    for (int trial = 0; trial < 50; ++trial) {
        Bits a(257), b(257);
        for (auto& v : a) v = coin(rng);
        for (auto& v : b) v = coin(rng);
        const double ber = ber_count(a, b);
        EXPECT_GE(ber, 0.0);
        EXPECT_LE(ber, 1.0);
        std::vector<std::size_t> perm(a.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        Bits pa(a.size()), pb(b.size());
        for (std::size_t i = 0; i < perm.size(); ++i) {
            pa[i] = a[perm[i]];
            pb[i] = b[perm[i]];
        }
        EXPECT_DOUBLE_EQ(ber_count(pa, pb), ber);
    }
}

TEST(BerFromSnr, Formula) {
    const double expected = 2.0 / (8.0 * constants::pi) * std::exp(-1.0);
    EXPECT_NEAR(ber_from_snr(8.0).raw / expected, 1.0, 1e-12);
    EXPECT_NEAR(ber_from_snr(8.0).value, 0.02928, 1e-5);
    EXPECT_NEAR(ber_from_snr(1e4).value, 0.0, 1e-300);
    EXPECT_EQ(ber_from_snr(1e6).value, 0.0);
}

TEST(BerFromSnr, LowSnrIsFlagged) {
    const auto r = ber_from_snr(1.0);
    EXPECT_NEAR(r.raw, 0.5618, 1e-4);
    EXPECT_TRUE(r.above_half());
    EXPECT_LE(r.value, 1.0);
    EXPECT_EQ(ber_from_snr(0.1).value, 1.0); // raw > 1, clamped
    EXPECT_THROW(ber_from_snr(0.0), Error);
    EXPECT_THROW(ber_from_snr(-1.0), Error);
}

TEST(QFactor, Examples) {
    EyeDiagram e{0.0, 1.0, 0.05, 0.05, 0.0, 100};
    EXPECT_NEAR(q_factor(e), 10.0, 1e-12);
    EyeDiagram flat{0.5, 0.5, 0.1, 0.1, 0.0, 100};
    EXPECT_EQ(q_factor(flat), 0.0);
    EyeDiagram scaled{0.0, 2.0, 0.1, 0.1, 0.0, 100};
    EXPECT_NEAR(q_factor(scaled), q_factor(e), 1e-12);
}

TEST(QFactor, NoiselessHasDistinctCode) {
    EyeDiagram e{0.0, 1.0, 0.0, 0.0, 1.0, 100};
    try {
        q_factor(e);
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::noiseless);
    }
}

TEST(BerFromQ, Examples) {
    EXPECT_DOUBLE_EQ(ber_from_q(0.0).value, 0.5);
    EXPECT_THROW(ber_from_q(-0.1), Error);
    EXPECT_LE(std::abs(ber_from_q(19.8265).log10 - std::log10(8.72786e-88)), 0.1);
    EXPECT_LE(std::abs(ber_from_q(34.0397).log10 - std::log10(2.855e-254)), 0.1);
}

TEST(BerFromQ, MatchesTablePairs) {
    // (Q, BER) pairs reported alongside each other in the comparison tables
    const std::pair<double, double> pairs[] = {
        {3.86079, 5.025e-5}, {34.0397, 2.855e-254}, {34.20, 1.1544e-256},
        {2.934, 0.00160863}, {17.5354, 3.841e-69}, {19.8265, 8.72786e-88},
    };
    for (auto [q, ber] : pairs) EXPECT_LE(std::abs(ber_from_q(q).log10 - std::log10(ber)), 0.1) << q;
}

TEST(BerFromQ, AgreesWithErfcToTwelveDigits) {
    for (double q = 0.0; q <= 30.0; q += 0.0625) {
        const auto b = ber_from_q(q);
        const hp ref = boost::math::erfc(hp(q) / boost::multiprecision::sqrt(hp(2)));
        const double rel = static_cast<double>(abs(hp(2 * b.value) / ref - 1));
        EXPECT_LT(rel, 1e-12) << "q = " << q;
    }
}

TEST(BerFromQ, LogDomainBeyondUnderflow) {
    for (double q : {38.0, 40.0, 58.762, 80.0}) {
        const auto b = ber_from_q(q);
        EXPECT_TRUE(b.clamped);
        EXPECT_EQ(b.value, 0.0);
        EXPECT_NEAR(b.log10, oracle_log10_ber(q), 1e-10 * std::abs(b.log10)) << q;
    }
    EXPECT_FALSE(ber_from_q(37.0).clamped);
}

TEST(BerFromQ, StrictlyDecreasing) {
    double prev = ber_from_q(0.0).log10;
    for (double q = 0.05; q <= 60.0; q += 0.05) {
        const double cur = ber_from_q(q).log10;
        EXPECT_LT(cur, prev) << q;
        prev = cur;
    }
}

TEST(BuildEye, IdealNrz) {
    Bits bits;
    for (int i = 0; i < 64; ++i) bits.push_back(static_cast<std::uint8_t>((i * 7 + i / 3) & 1));
    std::vector<double> w;
    for (auto b : bits) w.insert(w.end(), 8, b ? 1.0 : 0.0);
    const auto e = build_eye(w, bits, 8);
    EXPECT_EQ(e.mu1, 1.0);
    EXPECT_EQ(e.mu0, 0.0);
    EXPECT_EQ(e.sigma0, 0.0);
    EXPECT_EQ(e.sigma1, 0.0);
    EXPECT_EQ(e.eye_opening, 1.0);
    EXPECT_EQ(e.n_traces, 64u);
}

TEST(BuildEye, GaussianSigmaRecovered) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 0.07);
    std::bernoulli_distribution coin(0.5);
    Bits bits(20000);
    std::vector<double> w;
    for (auto& b : bits) {
        b = coin(rng);
        for (int k = 0; k < 4; ++k) w.push_back((b ? 1.0 : 0.0) + n(rng));
    }
    const auto e = build_eye(w, bits, 4);
    EXPECT_NEAR(e.sigma0 / 0.07, 1.0, 0.1);
    EXPECT_NEAR(e.sigma1 / 0.07, 1.0, 0.1);
}

TEST(BuildEye, DegenerateInputs) {
    Bits ones(100, 1);
    std::vector<double> w(400, 1.0);
    EXPECT_THROW(build_eye(w, ones, 4), Error);
    Bits bits(10, 0);
    std::vector<double> short_w(39, 0.0);
    EXPECT_THROW(build_eye(short_w, bits, 4), Error);
}

TEST(BuildEye, CountedBerTracksQForGaussianEyes) {
    // threshold at the midpoint; equal sigmas so the optimum coincides
    std::mt19937_64 rng(5);
    std::bernoulli_distribution coin(0.5);
    for (double q : {2.0, 2.5, 3.0}) {
        const double sigma = 1.0 / (2.0 * q);
        std::normal_distribution<double> n(0.0, sigma);
        const std::size_t nb = 200000;
        Bits tx(nb), rx(nb);
        std::vector<double> w(nb);
        for (std::size_t i = 0; i < nb; ++i) {
            tx[i] = coin(rng);
            w[i] = tx[i] + n(rng);
            rx[i] = w[i] > 0.5;
        }
        const auto eye = build_eye(w, tx, 1, 0);
        const double predicted = ber_from_q(q_factor(eye)).value;
        const double counted = ber_count(tx, rx);
        ASSERT_GE(counted * nb, 10.0);
        EXPECT_LT(std::max(counted / predicted, predicted / counted), 3.0) << q;
    }
}

TEST(EyeAccumulator, MergeMatchesSinglePass) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0.3, 0.2);
    EyeAccumulator whole, left, right;
    for (int i = 0; i < 5000; ++i) {
        const bool b = i % 3 == 0;
        const double v = n(rng) + b;
        whole.add(b, v);
        (i < 1700 ? left : right).add(b, v);
    }
    left.merge(right);
    const auto a = whole.finish(), c = left.finish();
    EXPECT_NEAR(a.mu0, c.mu0, 1e-12);
    EXPECT_NEAR(a.mu1, c.mu1, 1e-12);
    EXPECT_NEAR(a.sigma0, c.sigma0, 1e-12);
    EXPECT_NEAR(a.sigma1, c.sigma1, 1e-12);
}
