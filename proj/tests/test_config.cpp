#include "prescale/config.hpp"
#include "prescale/simulator.hpp"

#include <doctest.h>

#include <string>

using namespace prescale;
using nlohmann::json;

namespace {

std::string config_error(const json& j) {
    try {
        parse_scaler_config(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

} // namespace

TEST_CASE("defaults") {
    const ScalerConfig c;
    CHECK(c.threshold == 0.7);
    CHECK(c.init_timeout_ms == 25'000);
    CHECK(c.redistribution_timeout_ms == 30'000);
    CHECK(c.horizon_multiplier == 1.2);
    CHECK(c.alpha_up == 0.2);
    CHECK(c.beta_down == 0.1);
    CHECK(c.risk_k == 2.0);
    CHECK(c.scale_down_margin == 0.3);
    CHECK(c.spillover_cutoff == 0.1);
    CHECK(c.processing_cooldown_ms == 10'000);
    CHECK_FALSE(c.cooldowns.up_after_up.has_value());
    CHECK_NOTHROW(c.validate());
    CHECK(parse_scaler_config(json::object()).threshold == 0.7);
}

TEST_CASE("json round trip") {
    ScalerConfig c;
    c.threshold = 0.65;
    c.cooldowns.down_after_up = 30'000;
    c.metrics["cpu"] = ModelConfig{"overhead", 0.1, 1.0, 0.05};
    c.adaptive_timeout.enabled = false;
    const json j = to_json(c);
    CHECK(to_json(parse_scaler_config(j)) == j);
    CHECK(to_json(parse_scaler_config(json::parse(j.dump()))) == j);
}

TEST_CASE("partial documents keep other defaults") {
    const auto c = parse_scaler_config(json{{"threshold", 0.6}, {"cooldowns", {{"up_after_up_ms", 5000}}}});
    CHECK(c.threshold == 0.6);
    CHECK(c.cooldowns.up_after_up == 5000);
    CHECK_FALSE(c.cooldowns.down_after_up.has_value());
    CHECK(c.alpha_up == 0.2);
}

TEST_CASE("null disables a cooldown") {
    ScalerConfig base;
    base.cooldowns.up_after_down = 1000;
    const auto c = parse_scaler_config(json{{"cooldowns", {{"up_after_down_ms", nullptr}}}}, "scaler", base);
    CHECK_FALSE(c.cooldowns.up_after_down.has_value());
}

TEST_CASE("unknown keys and wrong types name the field") {
    CHECK(contains(config_error(json{{"treshold", 0.7}}), "scaler.treshold"));
    CHECK(contains(config_error(json{{"threshold", "high"}}), "scaler.threshold"));
    CHECK(contains(config_error(json{{"cooldowns", {{"up_after", 1}}}}), "scaler.cooldowns.up_after"));
    CHECK(contains(config_error(json{{"metrics", {{"elu", {{"kind", "default"}}}}}}), "scaler.metrics.elu.kind"));
    CHECK(contains(config_error(json{{"min_instances", 1.5}}), "scaler.min_instances"));
    CHECK_FALSE(config_error(json::array()).empty());
}

TEST_CASE("validation failures") {
    CHECK(contains(config_error(json{{"threshold", 0.0}}), "scaler.threshold"));
    CHECK(contains(config_error(json{{"alpha_up", 0.0}}), "scaler.smoothing"));
    CHECK(contains(config_error(json{{"kappa", 0.0}}), "scaler.redistribution"));
    CHECK(contains(config_error(json{{"cooldowns", {{"up_after_up_ms", -1}}}}), "scaler.cooldowns"));
    CHECK(contains(config_error(json{{"horizon_min_ms", 200'000}}), "scaler.horizon_max_ms"));
    CHECK(contains(config_error(json{{"adaptive_timeout", {{"window_size", 0}}}}), "window_size"));
    CHECK(contains(config_error(json{{"metrics", json::object()}}), "scaler.metrics"));
    CHECK(contains(config_error(json{{"min_instances", 5}, {"max_instances", 3}}), "scaler"));
}

TEST_CASE("overhead baseline must leave room for the margin") {
    // 0.7 / 1.3 = 0.538 is not above a baseline of 0.6.
    const json j{{"metrics", {{"cpu", {{"type", "overhead"}, {"baseline", 0.6}}}}}};
    CHECK(contains(config_error(j), "scaler.metrics.cpu"));
    const json ok{{"metrics", {{"cpu", {{"type", "overhead"}, {"baseline", 0.2}}}}}};
    CHECK(parse_scaler_config(ok).metrics.at("cpu").baseline == 0.2);
    CHECK_FALSE(config_error(json{{"metrics", {{"x", {{"type", "cubic"}}}}}}).empty());
}

TEST_CASE("scenario errors carry the scenario path") {
    json s{{"profile", json::array({json::array({0, 10}), json::array({1000, 10})})},
           {"scaler", {{"threshold", -1.0}}}};
    try {
        parse_scenario(s);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(contains(e.what(), "scenario.scaler.threshold"));
    }
    s["scaler"] = {{"bogus", 1}};
    CHECK_THROWS_WITH_AS(parse_scenario(s), doctest::Contains("scenario.scaler.bogus"), ConfigError);
    s.erase("scaler");
    s["simulation"] = {{"seed", -3}};
    CHECK_THROWS_WITH_AS(parse_scenario(s), doctest::Contains("scenario.simulation.seed"), ConfigError);
}

TEST_CASE("scenario json round trip") {
    for (const char* name : {"ramp", "spike", "zero"}) {
        const Scenario s = builtin_scenario(name);
        const json j = to_json(s);
        CHECK(to_json(parse_scenario(j)) == j);
    }
    CHECK_THROWS_AS(builtin_scenario("flood"), ConfigError);
}
