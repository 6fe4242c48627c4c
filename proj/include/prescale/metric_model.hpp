#pragma once

#include "prescale/common.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>

namespace prescale {

struct WeightedValue {
    double value = 0.0;
    double weight = 1.0;
};

/**
 * How a metric relates to the instance count.
 *
 * Every model is built from a strictly increasing per-instance transform g and
 * its inverse:
 *
 *   aggregate(v, w)      = sum_i w_i * g(v_i)
 *   project(S, N)        = g^-1(S / N)
 *   required_count(S, t) = S / g(t)
 *
 * Terms that depend on the fleet size or on other instances cannot be
 * expressed through this interface.
 */
class MetricModel {
public:
    virtual ~MetricModel() = default;

    virtual std::string name() const = 0;
    virtual double transform(double value) const = 0;
    virtual double inverse(double transformed) const = 0;

    /// Throws InvalidInput when `value` is outside the model's domain.
    virtual void check_domain(double value) const;

    double aggregate(std::span<const WeightedValue> values) const;
    double project(double aggregate, double count) const;
    double required_count(double aggregate, double threshold) const;

    /// Throws ConfigError unless g(threshold) > 0.
    void validate_threshold(double threshold) const;

    // Saturation is a property of the metric (ELU caps at 1.0, heap does not).
    void set_saturation(std::optional<double> max_value, double zone = 0.02);
    std::optional<double> max_value() const { return max_value_; }
    double saturation_zone() const { return saturation_zone_; }

    /// True when the raw aggregate sits inside the saturation zone for `count` instances.
    bool saturated(double raw_aggregate, int count) const;

private:
    std::optional<double> max_value_;
    double saturation_zone_ = 0.02;
};

using MetricModelPtr = std::shared_ptr<const MetricModel>;

/// g(v) = v: sum and average.
class DefaultModel final : public MetricModel {
public:
    std::string name() const override { return "default"; }
    double transform(double value) const override { return value; }
    double inverse(double transformed) const override { return transformed; }
};

/// g(v) = v - b: a fixed per-instance baseline that does not move between instances.
class OverheadModel final : public MetricModel {
public:
    explicit OverheadModel(double baseline);
    std::string name() const override { return "overhead"; }
    double transform(double value) const override { return value - baseline_; }
    double inverse(double transformed) const override { return transformed + baseline_; }
    double baseline() const { return baseline_; }

private:
    double baseline_;
};

/// g(v) = v^2. Restricted to v >= 0.
class QuadraticModel final : public MetricModel {
public:
    std::string name() const override { return "quadratic"; }
    double transform(double value) const override { return value * value; }
    double inverse(double transformed) const override;
    void check_domain(double value) const override;
};

/// User-supplied g / g^-1 pair. The caller is responsible for monotonicity.
class TransformModel final : public MetricModel {
public:
    using Fn = std::function<double(double)>;
    TransformModel(std::string name, Fn g, Fn g_inverse);
    std::string name() const override { return name_; }
    double transform(double value) const override { return g_(value); }
    double inverse(double transformed) const override { return g_inverse_(transformed); }

private:
    std::string name_;
    Fn g_;
    Fn g_inverse_;
};

} // namespace prescale
