#include "prescale/metric_model.hpp"

#include <cmath>

namespace prescale {

void MetricModel::check_domain(double) const {}

double MetricModel::aggregate(std::span<const WeightedValue> values) const {
    double sum = 0.0;
    for (const auto& v : values) {
        if (!std::isfinite(v.value)) {
            throw InvalidInput("aggregate: non-finite metric value");
        }
        if (!(v.weight >= 0.0 && v.weight <= 1.0)) {
            throw InvalidInput("aggregate: weight outside [0,1]");
        }
        check_domain(v.value);
        sum += v.weight * transform(v.value);
    }
    return sum;
}

double MetricModel::project(double aggregate, double count) const {
    if (!(count > 0.0)) {
        throw InvalidInput("project: instance count must be positive");
    }
    if (!std::isfinite(aggregate)) {
        throw InvalidInput("project: non-finite aggregate");
    }
    return inverse(aggregate / count);
}

double MetricModel::required_count(double aggregate, double threshold) const {
    const double per_instance = transform(threshold);
    if (!(per_instance > 0.0)) {
        throw ConfigError("required_count: g(threshold) must be positive for model " + name());
    }
    return aggregate / per_instance;
}

void MetricModel::validate_threshold(double threshold) const {
    if (!std::isfinite(threshold) || !(transform(threshold) > 0.0)) {
        throw ConfigError("threshold must satisfy g(threshold) > 0 for model " + name());
    }
}

void MetricModel::set_saturation(std::optional<double> max_value, double zone) {
    if (max_value) {
        if (!std::isfinite(*max_value)) {
            throw ConfigError("v_max must be finite");
        }
        if (!(zone > 0.0 && zone < 1.0)) {
            throw ConfigError("saturation_zone must lie in (0,1)");
        }
    }
    max_value_ = max_value;
    saturation_zone_ = zone;
}

bool MetricModel::saturated(double raw_aggregate, int count) const {
    if (!max_value_ || count <= 0) {
        return false;
    }
    return raw_aggregate >= count * *max_value_ * (1.0 - saturation_zone_);
}

OverheadModel::OverheadModel(double baseline) : baseline_(baseline) {
    if (!std::isfinite(baseline)) {
        throw ConfigError("overhead baseline must be finite");
    }
}

double QuadraticModel::inverse(double transformed) const {
    // Holt levels can dip marginally below zero; the metric itself cannot.
    return transformed <= 0.0 ? 0.0 : std::sqrt(transformed);
}

void QuadraticModel::check_domain(double value) const {
    if (value < 0.0) {
        throw InvalidInput("quadratic model: metric values must be non-negative");
    }
}

TransformModel::TransformModel(std::string name, Fn g, Fn g_inverse)
    : name_(std::move(name)), g_(std::move(g)), g_inverse_(std::move(g_inverse)) {
    if (!g_ || !g_inverse_) {
        throw ConfigError("transform model needs both g and its inverse");
    }
}

} // namespace prescale
