#include "prescale/control.hpp"

#include <doctest.h>

#include <vector>

using namespace prescale;

TEST_CASE("gate without cooldowns") {
    CooldownConfig none;
    ScalingHistory h;
    h.last_up_decision = 0;
    h.last_down_decision = 0;
    h.last_instance_started = 0;
    CHECK(gate(ScaleDirection::Up, 1, h, none));
    CHECK(gate(ScaleDirection::Down, 1, h, none));
    h.pending_scale_ups = 2;
    CHECK_FALSE(gate(ScaleDirection::Down, 1, h, none));
    CHECK(gate(ScaleDirection::Up, 1, h, none));
}

TEST_CASE("each cooldown blocks its own pair") {
    ScalingHistory h;
    h.last_up_decision = 100'000;
    h.last_down_decision = 200'000;
    h.last_instance_started = 150'000;

    CooldownConfig c;
    c.down_after_up = 30'000;
    CHECK_FALSE(gate(ScaleDirection::Down, 160'000, h, c)); // started 10 s ago
    CHECK(gate(ScaleDirection::Down, 180'000, h, c));

    c = {};
    c.up_after_up = 60'000;
    CHECK_FALSE(gate(ScaleDirection::Up, 159'999, h, c));
    CHECK(gate(ScaleDirection::Up, 160'000, h, c));

    c = {};
    c.up_after_down = 10'000;
    CHECK_FALSE(gate(ScaleDirection::Up, 205'000, h, c));
    CHECK(gate(ScaleDirection::Up, 210'000, h, c));

    c = {};
    c.down_after_down = 10'000;
    CHECK_FALSE(gate(ScaleDirection::Down, 205'000, h, c));
    CHECK(gate(ScaleDirection::Up, 205'000, h, c));
}

TEST_CASE("cooldown validation") {
    CooldownConfig c;
    c.up_after_up = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("estimator window") {
    InitTimeoutEstimator e(25'000, 0.2, 2.0, 1.0, 5);
    for (TimeMs m : {18'000, 22'000, 25'000}) {
        e.record(m);
    }
    e.record_measurement(100'000, 120'000);
    CHECK(std::vector<TimeMs>(e.window().begin(), e.window().end()) ==
          std::vector<TimeMs>{18'000, 22'000, 25'000, 20'000});
    e.record(30'000);
    e.record(0);
    CHECK(e.window().size() == 5);
    CHECK(e.window().front() == 22'000);
    CHECK_THROWS_AS(e.record(-1), InvalidInput);
    CHECK_THROWS_AS(e.record_measurement(10, 5), InvalidInput);
}

TEST_CASE("estimator steps") {
    InitTimeoutEstimator up(20'000, 0.2, 2.0, 1.0, 5);
    up.record(40'000);
    CHECK(up.update_timeout() == 28'000);

    InitTimeoutEstimator down(20'000, 0.2, 2.0, 1.0, 5);
    down.record(10'000);
    CHECK(down.update_timeout() == 16'000);

    InitTimeoutEstimator fixed(20'000, 0.2, 2.0, 1.0, 5);
    fixed.record(20'000);
    CHECK(fixed.update_timeout() == 20'000);

    InitTimeoutEstimator empty(20'000);
    CHECK(empty.update_timeout() == 20'000);
    CHECK_FALSE(empty.median().has_value());
}

TEST_CASE("even window uses the mean of the middle pair") {
    InitTimeoutEstimator e(20'000);
    for (TimeMs m : {10'000, 30'000, 20'000, 40'000}) {
        e.record(m);
    }
    CHECK(*e.median() == 25'000.0);
}

TEST_CASE("estimator never drops below one millisecond") {
    InitTimeoutEstimator e(2, 0.9, 1.0, 1.0, 1);
    e.record(0);
    for (int i = 0; i < 10; ++i) {
        e.update_timeout();
    }
    CHECK(e.current() >= 1);
}

TEST_CASE("estimator configuration") {
    CHECK_THROWS_AS(InitTimeoutEstimator(0), ConfigError);
    CHECK_THROWS_AS(InitTimeoutEstimator(1000, 0.0), ConfigError);
    CHECK_THROWS_AS(InitTimeoutEstimator(1000, 0.2, 1.0, 2.0), ConfigError);
    CHECK_THROWS_AS(InitTimeoutEstimator(1000, 0.2, 2.0, 0.0), ConfigError);
    CHECK_THROWS_AS(InitTimeoutEstimator(1000, 0.2, 2.0, 1.0, 0), ConfigError);
}
