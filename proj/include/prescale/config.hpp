#pragma once

#include "prescale/control.hpp"
#include "prescale/decision.hpp"
#include "prescale/metric_model.hpp"
#include "prescale/prediction.hpp"
#include "prescale/redistribution.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>

namespace prescale {

struct ModelConfig {
    std::string type = "default"; // default | overhead | quadratic
    double baseline = 0.0;        // overhead only
    std::optional<double> max_value;
    double saturation_zone = 0.02;

    MetricModelPtr build() const;
    bool operator==(const ModelConfig&) const = default;
};

struct AdaptiveTimeoutConfig {
    bool enabled = true;
    std::size_t window_size = 5;
    double rate = 0.2;
    double factor_up = 2.0;
    double factor_down = 1.0;

    bool operator==(const AdaptiveTimeoutConfig&) const = default;
};

/// Every tunable of the scaler. Defaults are the production values.
struct ScalerConfig {
    double threshold = 0.7;
    TimeMs sample_interval_ms = 1000;
    TimeMs init_timeout_ms = 25'000;
    TimeMs redistribution_timeout_ms = 30'000;
    double horizon_multiplier = 1.2;
    TimeMs horizon_min_ms = 10'000;
    TimeMs horizon_max_ms = 120'000;
    double kappa = 1.0;
    double alpha_up = 0.2;
    double alpha_down = 0.1;
    double beta_up = 0.2;
    double beta_down = 0.1;
    double dampening_epsilon = 1e-9;
    double trend_threshold_deg = 10.0;
    double risk_k = 2.0;
    double scale_down_margin = 0.3;
    int min_instances = 1;
    int max_instances = 100;
    int max_step = 10;
    double spillover_cutoff = 0.1;
    TimeMs processing_cooldown_ms = 10'000;
    int window_ticks = 120;
    std::map<std::string, ModelConfig> metrics{{"elu", ModelConfig{"default", 0.0, 1.0, 0.02}}};
    CooldownConfig cooldowns;
    AdaptiveTimeoutConfig adaptive_timeout;

    SmoothingParams smoothing() const;
    RedistributionParams redistribution() const;
    DecisionConfig decision() const;

    /// Throws ConfigError naming the offending field, prefixed with `prefix`.
    void validate(const std::string& prefix = "scaler") const;
};

/// Strict parse: unknown keys and wrong types are errors, missing keys keep the
/// values from `base`. `path` prefixes field names in error messages.
ScalerConfig parse_scaler_config(const nlohmann::json& j, const std::string& path = "scaler",
                                 const ScalerConfig& base = ScalerConfig{});
nlohmann::json to_json(const ScalerConfig& config);

/// Field reader shared by the config and scenario schemas.
class JsonFields {
public:
    JsonFields(const nlohmann::json& object, std::string path);

    double number(const std::string& key, double fallback);
    TimeMs integer(const std::string& key, TimeMs fallback);
    bool boolean(const std::string& key, bool fallback);
    std::string string(const std::string& key, const std::string& fallback);
    std::optional<TimeMs> optional_integer(const std::string& key, std::optional<TimeMs> fallback);
    std::optional<double> optional_number(const std::string& key, std::optional<double> fallback);
    /// Nested value or nullptr when absent; marks the key as consumed.
    const nlohmann::json* child(const std::string& key);
    std::string field(const std::string& key) const { return path_ + "." + key; }

    /// Throws ConfigError for any key that was not read.
    void finish() const;

private:
    const nlohmann::json& object_;
    std::string path_;
    std::map<std::string, bool> seen_;
};

} // namespace prescale
