#include "prescale/decision.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace prescale {

namespace {

constexpr double kLevelFloor = 1e-9;

} // namespace

std::string_view to_string(Direction d) {
    switch (d) {
    case Direction::Up: return "up";
    case Direction::Down: return "down";
    case Direction::Horizontal: return "horizontal";
    }
    return "?";
}

std::string_view to_string(DecisionPath p) {
    switch (p) {
    case DecisionPath::ScaleUp: return "scale_up";
    case DecisionPath::ScaleDown: return "scale_down";
    case DecisionPath::Hold: return "hold";
    }
    return "?";
}

double growth_threshold_from_degrees(double degrees) {
    return std::tan(degrees * std::numbers::pi / 180.0);
}

Direction classify_direction(double trend, double level, double gamma0) {
    if (level <= kLevelFloor) {
        return Direction::Horizontal;
    }
    const double gamma = trend / level;
    if (gamma > gamma0) {
        return Direction::Up;
    }
    if (gamma < -gamma0) {
        return Direction::Down;
    }
    return Direction::Horizontal;
}

void DecisionConfig::validate(const MetricModel& model) const {
    model.validate_threshold(threshold);
    if (!(scale_down_margin >= 0.0)) {
        throw ConfigError("scale-down margin must be non-negative");
    }
    model.validate_threshold(threshold / (1.0 + scale_down_margin));
    if (!(gamma0 >= 0.0)) {
        throw ConfigError("growth threshold must be non-negative");
    }
    if (!(risk_k > 0.0)) {
        throw ConfigError("risk factor k must be positive");
    }
    if (min_instances < 1 || max_instances < min_instances) {
        throw ConfigError("instance bounds must satisfy 1 <= min <= max");
    }
    if (max_step < 1) {
        throw ConfigError("max_step must be at least 1");
    }
    if (!(spillover_cutoff >= 0.0 && spillover_cutoff < 1.0)) {
        throw ConfigError("spillover cutoff must lie in [0,1)");
    }
}

Decision decide(const DecisionInputs& in, const DecisionConfig& cfg, const MetricModel& model) {
    if (in.target_count < cfg.min_instances || in.target_count > cfg.max_instances) {
        throw InvalidInput("decide: target count outside configured bounds");
    }
    if (in.step <= 0) {
        throw InvalidInput("decide: step must be positive");
    }

    const Forecast& f = in.forecast;
    Decision d;
    d.direction = classify_direction(f.trend, f.level, cfg.gamma0);
    const double now_divisor = in.weighted_count > 0.0 ? in.weighted_count : static_cast<double>(in.target_count);
    d.p_now = model.project(f.level, now_divisor);
    d.p_horizon = model.project(f.predicted, static_cast<double>(in.target_count));

    if (d.direction == Direction::Up || d.p_horizon > cfg.threshold) {
        d.path = DecisionPath::ScaleUp;
        const double growth = f.trend * static_cast<double>(f.horizon) / static_cast<double>(in.step);
        if (growth <= 0.0 || f.level <= kLevelFloor) {
            d.growth_ratio = f.level > kLevelFloor ? growth / f.level : 0.0;
            d.risk_weight = 1.0;
        } else {
            d.growth_ratio = growth / f.level;
            d.risk_weight = cfg.risk_k / (cfg.risk_k + d.growth_ratio);
        }
        d.dampened_prediction = f.level + d.risk_weight * growth;
        d.exact_need = model.required_count(d.dampened_prediction, cfg.threshold);
        int n = static_cast<int>(std::ceil(std::clamp(d.exact_need, -1.0, 1e9)));
        const double spill = d.exact_need - static_cast<double>(n - 1);
        if (d.p_now <= cfg.threshold && spill <= cfg.spillover_cutoff) {
            n -= 1;
            d.trimmed = true;
        }
        const int upper = std::min(in.target_count + cfg.max_step, cfg.max_instances);
        d.target = std::clamp(n, in.target_count, upper);
        return d;
    }

    if (d.p_now <= cfg.threshold) {
        d.path = DecisionPath::ScaleDown;
        d.exact_need = model.required_count(f.level, cfg.threshold / (1.0 + cfg.scale_down_margin));
        const double floored = std::floor(std::max(d.exact_need, 0.0));
        const int n = floored >= static_cast<double>(cfg.max_instances) ? cfg.max_instances
                                                                         : static_cast<int>(floored) + 1;
        d.target = std::clamp(n, cfg.min_instances, in.target_count);
        return d;
    }

    d.path = DecisionPath::Hold;
    d.target = in.target_count;
    return d;
}

int merge_targets(std::span<const int> targets) {
    if (targets.empty()) {
        throw InvalidInput("merge_targets: no targets");
    }
    return *std::max_element(targets.begin(), targets.end());
}

} // namespace prescale
