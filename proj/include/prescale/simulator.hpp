#pragma once

#include "prescale/config.hpp"
#include "prescale/pipeline.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace prescale {

enum class ScalerKind { Predictive, ReactiveElu, ReactiveCpu };

std::string_view to_string(ScalerKind kind);
/// Accepts predictive, reactive-elu, reactive-cpu. Throws ConfigError otherwise.
ScalerKind parse_scaler_kind(std::string_view text);

struct ProfilePoint {
    TimeMs time = 0;
    double rps = 0.0;
};

/// Piecewise-linear request rate. Held at the first value before the first point.
struct WorkloadProfile {
    std::vector<ProfilePoint> points;

    double rate_at(TimeMs t) const;
    TimeMs end() const { return points.empty() ? 0 : points.back().time; }
    void validate() const;
};

struct SimulationParams {
    std::uint64_t seed = 1;
    TimeMs warmup_ms = 60'000;
    int initial_instances = 0; // 0 means the scaler's min_instances
    double service_time_ms = 8.5;
    double service_jitter = 0.3; // uniform +-30%
    TimeMs client_timeout_ms = 10'000;
    TimeMs start_delay_ms = 20'000;
    TimeMs start_delay_spread_ms = 5'000; // triangular half-width
    TimeMs slow_start_ms = 30'000;
    double slow_start_min_weight = 0.1;
    TimeMs short_batch_ms = 5'000;
    TimeMs long_batch_ms = 40'000;
    TimeMs network_delay_min_ms = 20;
    TimeMs network_delay_max_ms = 80;
    TimeMs reactive_poll_ms = 15'000;
    TimeMs reactive_stabilization_ms = 300'000;
    double cpu_scale = 0.85;
    double cpu_noise = 0.05;
    TimeMs latency_window_ms = 10'000;

    void validate() const;
};

struct Scenario {
    std::string name = "custom";
    WorkloadProfile profile;
    SimulationParams sim;
    ScalerConfig scaler;
    ScalerKind scaler_kind = ScalerKind::Predictive;
};

/// Scaler defaults used by scenarios: bounds 4..20 and a scale-down-after-scale-up
/// cooldown equal to the redistribution timeout.
ScalerConfig scenario_scaler_defaults();

/// Strict parse with field paths in errors (ConfigError).
Scenario parse_scenario(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& scenario);
/// "ramp", "spike" or "zero". Throws ConfigError for other names.
Scenario builtin_scenario(std::string_view name);

struct TraceRow {
    TimeMs time = 0; // since profile start
    double target_rps = 0.0;
    double mean_metric = 0.0;
    double raw_sum = 0.0;
    int pod_count = 0;
    int pending = 0;
    int decision = 0;
    double p50 = 0.0;
    double p90 = 0.0;
    double p99 = 0.0;
};

struct SimulationSummary {
    std::uint64_t issued = 0;
    std::uint64_t served = 0;
    std::uint64_t errors = 0;
    std::uint64_t in_flight = 0;
    double success_rate = 1.0;
    double avg_latency_ms = 0.0;
    double median_latency_ms = 0.0;
    double p90_latency_ms = 0.0;
    double p99_latency_ms = 0.0;
    double over_threshold_fraction = 0.0; // ticks with mean metric > threshold + 0.1
    bool saturated = false;                // some tick with mean metric >= 0.95
    std::optional<int> recovery_ticks;
    int max_pods = 0;
    int final_pods = 0;
    // Whole run including warmup, for conservation checks.
    std::uint64_t total_issued = 0;
    std::uint64_t total_served = 0;
    std::uint64_t total_errors = 0;
    std::uint64_t total_in_flight = 0;
};

struct SimulationResult {
    std::vector<TraceRow> trace;
    SimulationSummary summary;
    std::string batch_log;     // line-delimited JSON, replayable
    std::string decisions_csv; // decision trace of the predictive pipeline
    std::vector<double> utilization_samples;
};

/// Runs one scenario. With a reactive scaler the predictive pipeline still runs
/// in shadow mode so the batch log and decision trace are always produced.
SimulationResult simulate(const Scenario& scenario);

std::string trace_csv(const std::vector<TraceRow>& rows);
nlohmann::json summary_json(const SimulationSummary& summary);

/// N* = ceil(sum / threshold), clamped to the bounds.
int reactive_step(std::span<const double> values, double threshold, int min_instances, int max_instances);

/// Short timeout if any pending value exceeds the threshold, else long.
TimeMs batch_timeout(std::span<const double> values, double threshold, TimeMs short_timeout, TimeMs long_timeout);

/// First saturated tick (mean >= 0.95) to the start of the first run of `hold`
/// consecutive ticks with mean <= limit. Empty when never saturated or never recovered.
std::optional<int> recovery_ticks(const std::vector<TraceRow>& rows, double limit, int hold = 10);

} // namespace prescale
