#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "fso/core.hpp"

using namespace fso;

TEST(Units, DbmToWatts) {
    EXPECT_DOUBLE_EQ(dbm_to_watts(0.0), 1e-3);
    EXPECT_NEAR(dbm_to_watts(60.0), 1e3, 1e-9);
    EXPECT_NEAR(dbm_to_watts(30.0), 1.0, 1e-15);
    EXPECT_THROW(dbm_to_watts(std::numeric_limits<double>::infinity()), Error);
    EXPECT_THROW(dbm_to_watts(std::nan("")), Error);
}

TEST(Units, WattsToDbm) {
    EXPECT_NEAR(watts_to_dbm(1e-3), 0.0, 1e-12);
    EXPECT_NEAR(watts_to_dbm(1.0), 30.0, 1e-12);
    try {
        watts_to_dbm(0.0);
        FAIL() << "expected no_signal";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::no_signal);
    }
    EXPECT_THROW(watts_to_dbm(-1.0), Error);
}

TEST(Units, RoundTripIntegerDbm) {
    for (int x = -60; x <= 60; ++x) EXPECT_NEAR(watts_to_dbm(dbm_to_watts(x)), x, 1e-12);
}

TEST(Units, RoundTripRelative) {
    // 1e-12 relative over [-100, 100] dBm, checked on the watt side
    for (double x = -100.0; x <= 100.0; x += 0.37) {
        const double w = dbm_to_watts(x);
        EXPECT_NEAR(dbm_to_watts(watts_to_dbm(w)) / w, 1.0, 1e-12) << x;
        if (std::abs(x) > 1.0) {
            EXPECT_NEAR(watts_to_dbm(w) / x, 1.0, 1e-12) << x;
        }
    }
}

TEST(Units, OpticalFrequency) {
    EXPECT_NEAR(optical_frequency(1550.0) / 1.9341e14, 1.0, 1e-4);
    EXPECT_NEAR(optical_frequency(1500.0) / 1.9986e14, 1.0, 1e-4);
    EXPECT_DOUBLE_EQ(optical_frequency(3100.0), optical_frequency(1550.0) / 2.0);
    EXPECT_THROW(optical_frequency(0.0), Error);
    EXPECT_THROW(optical_frequency(-1.0), Error);
}

TEST(LinkConfig, DefaultsAreReferenceSetup) {
    LinkConfig c;
    EXPECT_EQ(c.tx_power, 60.0);
    EXPECT_EQ(c.wavelength, 1550.0);
    EXPECT_EQ(c.bit_rate, 1e10);
    EXPECT_NO_THROW(validate(c));
}

TEST(LinkConfig, ValidationNamesField) {
    auto expect_bad = [](auto mutate, const char* field) {
        LinkConfig c;
        mutate(c);
        try {
            validate(c);
            ADD_FAILURE() << "accepted invalid " << field;
        } catch (const Error& e) {
            EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
        }
    };
    expect_bad([](LinkConfig& c) { c.bit_rate = -1; }, "bit_rate");
    expect_bad([](LinkConfig& c) { c.wavelength = 0; }, "wavelength");
    expect_bad([](LinkConfig& c) { c.rx_aperture_diameter = 0; }, "rx_aperture_diameter");
    expect_bad([](LinkConfig& c) { c.extinction_ratio = 0; }, "extinction_ratio");
    expect_bad([](LinkConfig& c) { c.max_amplifier_stages = 9; }, "max_amplifier_stages");
    expect_bad([](LinkConfig& c) { c.electrical_bandwidth = 0; }, "electrical_bandwidth");
    expect_bad([](LinkConfig& c) { c.beam_divergence = -1e-3; }, "beam_divergence");
}

TEST(Constraints, Validation) {
    EXPECT_NO_THROW(validate(Constraints{}));
    EXPECT_NO_THROW(validate(Constraints{1.0, 0.0}));
    EXPECT_THROW(validate(Constraints{0.0, 1e9}), Error);
    EXPECT_THROW(validate(Constraints{1.5, 1e9}), Error);
    EXPECT_THROW(validate(Constraints{1e-9, -1.0}), Error);
}

TEST(WeatherSpec, OneEntryPerCondition) {
    WeatherSpec w{{Condition::fog, 0.2}};
    w.set(Condition::fog, 0.7);
    ASSERT_EQ(w.components().size(), 1u);
    EXPECT_EQ(*w.severity(Condition::fog), 0.7);
    EXPECT_FALSE(w.severity(Condition::rain));
    EXPECT_THROW(w.set(Condition::rain, 1.1), Error);
    EXPECT_THROW(w.set(Condition::rain, -0.1), Error);
    w.erase(Condition::fog);
    EXPECT_TRUE(w.empty());
}
