#include "prescale/simulator.hpp"
#include "prescale/batch_log.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>
#include <vector>

using namespace prescale;

namespace {

Scenario short_ramp(std::uint64_t seed) {
    Scenario s = builtin_scenario("ramp");
    s.profile.points = {{0, 20.0}, {60'000, 300.0}, {90'000, 300.0}};
    s.sim.seed = seed;
    s.sim.warmup_ms = 20'000;
    return s;
}

TraceRow row(double mean) {
    TraceRow r;
    r.mean_metric = mean;
    return r;
}

} // namespace

TEST_CASE("profile interpolation") {
    WorkloadProfile p{{{0, 10.0}, {100, 110.0}, {200, 110.0}}};
    CHECK(p.rate_at(-50) == 10.0);
    CHECK(p.rate_at(50) == 60.0);
    CHECK(p.rate_at(150) == 110.0);
    CHECK(p.rate_at(500) == 110.0);
    CHECK(p.end() == 200);
    CHECK_THROWS_AS((WorkloadProfile{{{0, 1.0}, {0, 2.0}}}.validate()), ConfigError);
    CHECK_THROWS_AS((WorkloadProfile{{{0, -1.0}, {10, 2.0}}}.validate()), ConfigError);
    CHECK_THROWS_AS(WorkloadProfile{}.validate(), ConfigError);
}

TEST_CASE("scaler kinds") {
    CHECK(parse_scaler_kind("reactive-cpu") == ScalerKind::ReactiveCpu);
    CHECK(to_string(ScalerKind::ReactiveElu) == "reactive-elu");
    CHECK_THROWS_AS(parse_scaler_kind("magic"), ConfigError);
}

TEST_CASE("reactive step") {
    const std::vector<double> busy{0.9, 0.9, 0.8, 0.8};
    CHECK(reactive_step(busy, 0.7, 1, 20) == 5);
    CHECK(reactive_step(std::vector<double>{0.0, 0.0}, 0.7, 2, 20) == 2);
    const std::vector<double> exact{0.7, 0.7, 0.7};
    CHECK(reactive_step(exact, 0.7, 1, 20) == 3);
    CHECK(reactive_step(busy, 0.1, 1, 20) == 20);
}

TEST_CASE("batch timeout") {
    CHECK(batch_timeout(std::vector<double>{0.2, 0.75}, 0.7, 5000, 40'000) == 5000);
    CHECK(batch_timeout(std::vector<double>{0.2, 0.7}, 0.7, 5000, 40'000) == 40'000);
    CHECK(batch_timeout(std::vector<double>{}, 0.7, 5000, 40'000) == 40'000);
}

TEST_CASE("recovery ticks") {
    std::vector<TraceRow> rows;
    for (double m : {0.5, 0.96, 0.99, 0.8, 0.7, 0.7, 0.7, 0.9}) {
        rows.push_back(row(m));
    }
    CHECK(recovery_ticks(rows, 0.75, 3) == 3);
    CHECK_FALSE(recovery_ticks(rows, 0.6, 3).has_value());
    rows[1].mean_metric = 0.9;
    rows[2].mean_metric = 0.9;
    CHECK_FALSE(recovery_ticks(rows, 0.75, 3).has_value());
}

TEST_CASE("same seed, same run") {
    const auto a = simulate(short_ramp(3));
    const auto b = simulate(short_ramp(3));
    CHECK(trace_csv(a.trace) == trace_csv(b.trace));
    CHECK(a.batch_log == b.batch_log);
    CHECK(a.decisions_csv == b.decisions_csv);
    CHECK(summary_json(a.summary) == summary_json(b.summary));
    const auto c = simulate(short_ramp(4));
    CHECK(a.batch_log != c.batch_log);
}

TEST_CASE("requests are conserved") {
    for (ScalerKind kind : {ScalerKind::Predictive, ScalerKind::ReactiveElu, ScalerKind::ReactiveCpu}) {
        for (const char* name : {"ramp", "spike"}) {
            Scenario s = builtin_scenario(name);
            s.scaler_kind = kind;
            const auto r = simulate(s);
            const auto& m = r.summary;
            CHECK(m.issued == m.served + m.errors + m.in_flight);
            CHECK(m.total_issued == m.total_served + m.total_errors + m.total_in_flight);
            CHECK(m.total_issued >= m.issued);
            CHECK(m.success_rate >= 0.0);
            CHECK(m.success_rate <= 1.0);
            for (double u : r.utilization_samples) {
                CHECK(u >= 0.0);
                CHECK(u <= 1.0);
            }
            CHECK(m.max_pods <= s.scaler.max_instances);
            CHECK(m.final_pods >= s.scaler.min_instances);
        }
    }
}

TEST_CASE("zero traffic stays at the minimum") {
    for (ScalerKind kind : {ScalerKind::Predictive, ScalerKind::ReactiveElu, ScalerKind::ReactiveCpu}) {
        Scenario s = builtin_scenario("zero");
        s.scaler_kind = kind;
        const auto r = simulate(s);
        CHECK(r.summary.issued == 0);
        CHECK(r.summary.errors == 0);
        CHECK(r.summary.max_pods == s.scaler.min_instances);
        for (const auto& t : r.trace) {
            CHECK(t.pod_count == s.scaler.min_instances);
            CHECK(t.mean_metric == 0.0);
        }
        CHECK(std::all_of(r.utilization_samples.begin(), r.utilization_samples.end(),
                          [](double u) { return u == 0.0; }));
    }
}

TEST_CASE("ample fixed capacity serves at the bare service time") {
    Scenario s = builtin_scenario("ramp");
    s.profile.points = {{0, 20.0}, {60'000, 20.0}};
    s.scaler.min_instances = 20;
    s.scaler.max_instances = 20;
    s.sim.service_jitter = 0.0;
    const auto r = simulate(s);
    CHECK(r.summary.errors == 0);
    CHECK(r.summary.success_rate == 1.0);
    CHECK(r.summary.median_latency_ms == doctest::Approx(8.5));
    CHECK(r.summary.avg_latency_ms >= 8.5 - 1e-9);
    CHECK(r.summary.avg_latency_ms < 8.6);
    CHECK(r.summary.max_pods == 20);
}

TEST_CASE("predictive scaler grows steadily through the ramp") {
    Scenario s = builtin_scenario("ramp");
    const auto pred = simulate(s);
    s.scaler_kind = ScalerKind::ReactiveElu;
    const auto reactive = simulate(s);
    int last = 0;
    for (const auto& t : pred.trace) {
        if (t.time > 150'000) {
            break;
        }
        CHECK(t.pod_count >= last);
        last = t.pod_count;
    }
    CHECK(std::abs(pred.summary.final_pods - reactive.summary.final_pods) <= 2);
}

TEST_CASE("the batch log replays to the recorded decisions") {
    for (ScalerKind kind : {ScalerKind::Predictive, ScalerKind::ReactiveCpu}) {
        Scenario s = short_ramp(11);
        s.scaler_kind = kind;
        const auto r = simulate(s);
        std::istringstream in(r.batch_log);
        const auto events = read_batch_log(in);
        REQUIRE(events.front().config.has_value());
        std::ostringstream out;
        replay(events, *events.front().config, out);
        CHECK(out.str() == r.decisions_csv);
        CHECK(r.decisions_csv.find("scale_") != std::string::npos);
    }
}

TEST_CASE("simulation parameter validation") {
    Scenario s = short_ramp(1);
    s.sim.service_jitter = 1.5;
    CHECK_THROWS_AS(simulate(s), ConfigError);
    s = short_ramp(1);
    s.sim.short_batch_ms = 0;
    CHECK_THROWS_AS(simulate(s), ConfigError);
    s = short_ramp(1);
    s.scaler.threshold = -1.0;
    CHECK_THROWS_WITH_AS(simulate(s), doctest::Contains("scenario.scaler.threshold"), ConfigError);
}
