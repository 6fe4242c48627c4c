#include "prescale/prediction.hpp"

#include <algorithm>
#include <cmath>

namespace prescale {

namespace {

bool in_unit_interval(double v) { return v > 0.0 && v <= 1.0; }

} // namespace

void SmoothingParams::validate() const {
    if (!in_unit_interval(alpha_up) || !in_unit_interval(alpha_down) || !in_unit_interval(beta_up) ||
        !in_unit_interval(beta_down)) {
        throw ConfigError("smoothing parameters must lie in (0,1]");
    }
    if (!(epsilon > 0.0)) {
        throw ConfigError("dampening epsilon must be positive");
    }
}

std::vector<std::string> SmoothingParams::warnings() const {
    std::vector<std::string> out;
    if (alpha_up < alpha_down) {
        out.emplace_back("alpha_up < alpha_down: rises will be tracked slower than drops");
    }
    if (beta_up < beta_down) {
        out.emplace_back("beta_up < beta_down: upward trends will build slower than downward ones");
    }
    return out;
}

void holt_update(HoltState& state, const HoltInput& input, const SmoothingParams& params, const MetricModel& model) {
    if (!state.initialized()) {
        state.level = input.aggregate;
        state.trend = 0.0;
        state.last_tick = input.tick;
        return;
    }

    const double prev_level = state.level;
    const double prev_trend = state.trend;

    const double forecast = prev_level + prev_trend + input.delta;
    const bool rising = input.aggregate > forecast;
    const double alpha = rising ? params.alpha_up : params.alpha_down;
    const double beta = rising ? params.beta_up : params.beta_down;

    double level = alpha * input.aggregate + (1.0 - alpha) * forecast;
    double trend = beta * (level - prev_level - input.delta) + (1.0 - beta) * prev_trend;

    if (level > input.aggregate) {
        const double gap = level - input.aggregate;
        trend *= gap / (gap + std::abs(trend) + params.epsilon);
    }

    if (model.saturated(input.raw_aggregate, input.instance_count)) {
        level = std::min(level, input.instance_count * *model.max_value());
        trend = std::max(trend, prev_trend);
    }

    state.level = level;
    state.trend = trend;
    state.last_tick = input.tick;
}

TimeMs horizon(TimeMs init_timeout, double multiplier, TimeMs h_min, TimeMs h_max) {
    if (h_min > h_max) {
        throw ConfigError("horizon bounds: h_min must not exceed h_max");
    }
    const auto scaled = static_cast<TimeMs>(std::llround(multiplier * static_cast<double>(init_timeout)));
    return std::clamp(scaled, h_min, h_max);
}

Forecast extrapolate(const HoltState& state, TimeMs horizon, TimeMs step) {
    if (!state.initialized()) {
        throw InvalidInput("extrapolate: smoother has not seen any tick");
    }
    if (step <= 0) {
        throw InvalidInput("extrapolate: step must be positive");
    }
    Forecast f;
    f.level = state.level;
    f.trend = state.trend;
    f.horizon = horizon;
    f.predicted = state.level + state.trend * static_cast<double>(horizon) / static_cast<double>(step);
    return f;
}

} // namespace prescale
