#pragma once

#include "prescale/common.hpp"
#include "prescale/metric_model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace prescale {

/// Direction-dependent Holt parameters. Defaults match the production configuration.
struct SmoothingParams {
    double alpha_up = 0.2;
    double beta_up = 0.2;
    double alpha_down = 0.1;
    double beta_down = 0.1;
    double epsilon = 1e-9; // dampening guard against 0/0

    /// Throws ConfigError for parameters outside (0,1] or a non-positive epsilon.
    void validate() const;
    /// Non-fatal remarks, e.g. the downward pair reacting faster than the upward one.
    std::vector<std::string> warnings() const;
};

struct HoltState {
    double level = 0.0;
    double trend = 0.0;
    std::optional<TimeMs> last_tick;

    bool initialized() const { return last_tick.has_value(); }
    bool operator==(const HoltState&) const = default;
};

/// Everything one tick contributes to the smoother.
struct HoltInput {
    TimeMs tick = 0;
    double aggregate = 0.0;     // A_t
    double delta = 0.0;         // redistribution delta
    double raw_aggregate = 0.0; // A_t^r, used for saturation detection
    int instance_count = 0;     // N_t
};

struct Forecast {
    double predicted = 0.0; // A_H
    double level = 0.0;
    double trend = 0.0;     // per tick
    TimeMs horizon = 0;

    bool operator==(const Forecast&) const = default;
};

/**
 * Modified Holt update. Per tick: forecast -> level -> trend -> dampening ->
 * saturation clamp. The first call initialises level = A, trend = 0.
 */
void holt_update(HoltState& state, const HoltInput& input, const SmoothingParams& params, const MetricModel& model);

/// H = clamp(multiplier * init_timeout, h_min, h_max), rounded to the millisecond.
TimeMs horizon(TimeMs init_timeout, double multiplier, TimeMs h_min, TimeMs h_max);

/// A_H = level + trend * H / step.
Forecast extrapolate(const HoltState& state, TimeMs horizon, TimeMs step);

} // namespace prescale
