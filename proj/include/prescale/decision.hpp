#pragma once

#include "prescale/metric_model.hpp"
#include "prescale/prediction.hpp"

#include <span>
#include <string_view>

namespace prescale {

enum class Direction { Up, Down, Horizontal };
enum class DecisionPath { ScaleUp, ScaleDown, Hold };

std::string_view to_string(Direction d);
std::string_view to_string(DecisionPath p);

/// gamma_0 = tan(theta_0), theta_0 in degrees.
double growth_threshold_from_degrees(double degrees);

/// gamma = trend / level against the deadband [-gamma0, gamma0]. A level at or
/// below 1e-9 has no meaningful ratio and is reported as horizontal.
Direction classify_direction(double trend, double level, double gamma0);

struct DecisionConfig {
    double threshold = 0.7;          // tau
    double gamma0 = 0.17632698070846498; // tan(10 deg)
    double risk_k = 2.0;
    double scale_down_margin = 0.3;  // mu
    int min_instances = 1;
    int max_instances = 100;
    int max_step = 10;               // N_step
    double spillover_cutoff = 0.1;

    void validate(const MetricModel& model) const;
};

struct DecisionInputs {
    Forecast forecast;
    double weighted_count = 0.0; // N^w
    int target_count = 1;        // N_target
    TimeMs step = 1000;          // tick spacing
};

struct Decision {
    int target = 0;
    DecisionPath path = DecisionPath::Hold;
    Direction direction = Direction::Horizontal;
    double p_now = 0.0;
    double p_horizon = 0.0;
    // Scale-up internals, zero on other paths.
    double growth_ratio = 0.0;
    double risk_weight = 1.0;
    double dampened_prediction = 0.0;
    double exact_need = 0.0;
    bool trimmed = false;
};

/// One scaling decision for a single metric stream. Throws InvalidInput when
/// target_count lies outside [min_instances, max_instances].
Decision decide(const DecisionInputs& inputs, const DecisionConfig& config, const MetricModel& model);

/// Highest target wins. Throws InvalidInput on an empty list.
int merge_targets(std::span<const int> targets);

} // namespace prescale
