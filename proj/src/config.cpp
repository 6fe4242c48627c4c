#include "prescale/config.hpp"

#include <cmath>

namespace prescale {

using nlohmann::json;

JsonFields::JsonFields(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) {
        throw ConfigError(path_ + ": expected an object");
    }
    for (const auto& [key, value] : object_.items()) {
        seen_[key] = false;
    }
}

const json* JsonFields::child(const std::string& key) {
    auto it = object_.find(key);
    if (it == object_.end()) {
        return nullptr;
    }
    seen_[key] = true;
    return &*it;
}

double JsonFields::number(const std::string& key, double fallback) {
    const json* v = child(key);
    if (!v) {
        return fallback;
    }
    if (!v->is_number()) {
        throw ConfigError(field(key) + ": expected a number");
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) {
        throw ConfigError(field(key) + ": must be finite");
    }
    return d;
}

TimeMs JsonFields::integer(const std::string& key, TimeMs fallback) {
    const json* v = child(key);
    if (!v) {
        return fallback;
    }
    if (!v->is_number_integer()) {
        throw ConfigError(field(key) + ": expected an integer");
    }
    return v->get<TimeMs>();
}

bool JsonFields::boolean(const std::string& key, bool fallback) {
    const json* v = child(key);
    if (!v) {
        return fallback;
    }
    if (!v->is_boolean()) {
        throw ConfigError(field(key) + ": expected true or false");
    }
    return v->get<bool>();
}

std::string JsonFields::string(const std::string& key, const std::string& fallback) {
    const json* v = child(key);
    if (!v) {
        return fallback;
    }
    if (!v->is_string()) {
        throw ConfigError(field(key) + ": expected a string");
    }
    return v->get<std::string>();
}

std::optional<TimeMs> JsonFields::optional_integer(const std::string& key, std::optional<TimeMs> fallback) {
    const json* v = child(key);
    if (!v) {
        return fallback;
    }
    if (v->is_null()) {
        return std::nullopt;
    }
    if (!v->is_number_integer()) {
        throw ConfigError(field(key) + ": expected an integer or null");
    }
    return v->get<TimeMs>();
}

std::optional<double> JsonFields::optional_number(const std::string& key, std::optional<double> fallback) {
    const json* v = child(key);
    if (!v) {
        return fallback;
    }
    if (v->is_null()) {
        return std::nullopt;
    }
    if (!v->is_number()) {
        throw ConfigError(field(key) + ": expected a number or null");
    }
    return v->get<double>();
}

void JsonFields::finish() const {
    for (const auto& [key, used] : seen_) {
        if (!used) {
            throw ConfigError(field(key) + ": unknown key");
        }
    }
}

MetricModelPtr ModelConfig::build() const {
    std::shared_ptr<MetricModel> model;
    if (type == "default") {
        model = std::make_shared<DefaultModel>();
    } else if (type == "overhead") {
        model = std::make_shared<OverheadModel>(baseline);
    } else if (type == "quadratic") {
        model = std::make_shared<QuadraticModel>();
    } else {
        throw ConfigError("unknown metric model type '" + type + "'");
    }
    model->set_saturation(max_value, saturation_zone);
    return model;
}

SmoothingParams ScalerConfig::smoothing() const {
    return SmoothingParams{alpha_up, beta_up, alpha_down, beta_down, dampening_epsilon};
}

RedistributionParams ScalerConfig::redistribution() const {
    return RedistributionParams{redistribution_timeout_ms, kappa};
}

DecisionConfig ScalerConfig::decision() const {
    DecisionConfig d;
    d.threshold = threshold;
    d.gamma0 = growth_threshold_from_degrees(trend_threshold_deg);
    d.risk_k = risk_k;
    d.scale_down_margin = scale_down_margin;
    d.min_instances = min_instances;
    d.max_instances = max_instances;
    d.max_step = max_step;
    d.spillover_cutoff = spillover_cutoff;
    return d;
}

void ScalerConfig::validate(const std::string& prefix) const {
    auto require = [&prefix](bool ok, const char* what) {
        if (!ok) {
            throw ConfigError(prefix + "." + what);
        }
    };
    require(threshold > 0.0, "threshold: must be positive");
    require(sample_interval_ms > 0, "sample_interval_ms: must be positive");
    require(init_timeout_ms > 0, "init_timeout_ms: must be positive");
    require(horizon_multiplier > 0.0, "horizon_multiplier: must be positive");
    require(horizon_min_ms > 0, "horizon_min_ms: must be positive");
    require(horizon_min_ms <= horizon_max_ms, "horizon_max_ms: must be >= horizon_min_ms");
    require(trend_threshold_deg >= 0.0 && trend_threshold_deg < 90.0, "trend_threshold_deg: must lie in [0,90)");
    require(processing_cooldown_ms >= 0, "processing_cooldown_ms: must be non-negative");
    require(window_ticks >= 2, "window_ticks: must be at least 2");
    require(!metrics.empty(), "metrics: at least one metric is required");

    auto rethrow = [](const std::string& where, auto&& fn) {
        try {
            fn();
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        } catch (const InvalidInput& e) {
            throw ConfigError(where + ": " + e.what());
        }
    };
    rethrow(prefix + ".redistribution", [&] { prescale::validate(redistribution()); });
    rethrow(prefix + ".smoothing", [&] { smoothing().validate(); });
    rethrow(prefix + ".cooldowns", [&] { cooldowns.validate(); });
    rethrow(prefix + ".adaptive_timeout", [&] {
        InitTimeoutEstimator probe(init_timeout_ms, adaptive_timeout.rate, adaptive_timeout.factor_up,
                                   adaptive_timeout.factor_down, adaptive_timeout.window_size);
    });
    for (const auto& [id, m] : metrics) {
        rethrow(prefix + ".metrics." + id, [&] {
            if (m.max_value && !(*m.max_value > 0.0)) {
                throw ConfigError("max_value must be positive");
            }
            auto model = m.build();
            decision().validate(*model);
        });
    }
}

namespace {

ModelConfig parse_model(const json& j, const std::string& path) {
    JsonFields f(j, path);
    ModelConfig m;
    m.type = f.string("type", m.type);
    m.baseline = f.number("baseline", m.baseline);
    m.max_value = f.optional_number("max_value", m.max_value);
    m.saturation_zone = f.number("saturation_zone", m.saturation_zone);
    f.finish();
    return m;
}

json optional_to_json(const std::optional<TimeMs>& v) {
    return v ? json(*v) : json(nullptr);
}

} // namespace

ScalerConfig parse_scaler_config(const json& j, const std::string& path, const ScalerConfig& base) {
    JsonFields f(j, path);
    ScalerConfig c = base;
    c.threshold = f.number("threshold", c.threshold);
    c.sample_interval_ms = f.integer("sample_interval_ms", c.sample_interval_ms);
    c.init_timeout_ms = f.integer("init_timeout_ms", c.init_timeout_ms);
    c.redistribution_timeout_ms = f.integer("redistribution_timeout_ms", c.redistribution_timeout_ms);
    c.horizon_multiplier = f.number("horizon_multiplier", c.horizon_multiplier);
    c.horizon_min_ms = f.integer("horizon_min_ms", c.horizon_min_ms);
    c.horizon_max_ms = f.integer("horizon_max_ms", c.horizon_max_ms);
    c.kappa = f.number("kappa", c.kappa);
    c.alpha_up = f.number("alpha_up", c.alpha_up);
    c.alpha_down = f.number("alpha_down", c.alpha_down);
    c.beta_up = f.number("beta_up", c.beta_up);
    c.beta_down = f.number("beta_down", c.beta_down);
    c.dampening_epsilon = f.number("dampening_epsilon", c.dampening_epsilon);
    c.trend_threshold_deg = f.number("trend_threshold_deg", c.trend_threshold_deg);
    c.risk_k = f.number("risk_k", c.risk_k);
    c.scale_down_margin = f.number("scale_down_margin", c.scale_down_margin);
    c.min_instances = static_cast<int>(f.integer("min_instances", c.min_instances));
    c.max_instances = static_cast<int>(f.integer("max_instances", c.max_instances));
    c.max_step = static_cast<int>(f.integer("max_step", c.max_step));
    c.spillover_cutoff = f.number("spillover_cutoff", c.spillover_cutoff);
    c.processing_cooldown_ms = f.integer("processing_cooldown_ms", c.processing_cooldown_ms);
    c.window_ticks = static_cast<int>(f.integer("window_ticks", c.window_ticks));

    if (const json* metrics = f.child("metrics")) {
        if (!metrics->is_object()) {
            throw ConfigError(f.field("metrics") + ": expected an object keyed by metric id");
        }
        c.metrics.clear();
        for (const auto& [id, m] : metrics->items()) {
            c.metrics[id] = parse_model(m, f.field("metrics") + "." + id);
        }
    }
    if (const json* cd = f.child("cooldowns")) {
        JsonFields g(*cd, f.field("cooldowns"));
        c.cooldowns.up_after_up = g.optional_integer("up_after_up_ms", c.cooldowns.up_after_up);
        c.cooldowns.up_after_down = g.optional_integer("up_after_down_ms", c.cooldowns.up_after_down);
        c.cooldowns.down_after_up = g.optional_integer("down_after_up_ms", c.cooldowns.down_after_up);
        c.cooldowns.down_after_down = g.optional_integer("down_after_down_ms", c.cooldowns.down_after_down);
        g.finish();
    }
    if (const json* at = f.child("adaptive_timeout")) {
        JsonFields g(*at, f.field("adaptive_timeout"));
        auto& a = c.adaptive_timeout;
        a.enabled = g.boolean("enabled", a.enabled);
        const TimeMs window = g.integer("window_size", static_cast<TimeMs>(a.window_size));
        if (window < 1) {
            throw ConfigError(g.field("window_size") + ": must be at least 1");
        }
        a.window_size = static_cast<std::size_t>(window);
        a.rate = g.number("rate", a.rate);
        a.factor_up = g.number("factor_up", a.factor_up);
        a.factor_down = g.number("factor_down", a.factor_down);
        g.finish();
    }
    f.finish();
    c.validate(path);
    return c;
}

json to_json(const ScalerConfig& c) {
    json metrics = json::object();
    for (const auto& [id, m] : c.metrics) {
        metrics[id] = {{"type", m.type},
                       {"baseline", m.baseline},
                       {"max_value", m.max_value ? json(*m.max_value) : json(nullptr)},
                       {"saturation_zone", m.saturation_zone}};
    }
    return {
        {"threshold", c.threshold},
        {"sample_interval_ms", c.sample_interval_ms},
        {"init_timeout_ms", c.init_timeout_ms},
        {"redistribution_timeout_ms", c.redistribution_timeout_ms},
        {"horizon_multiplier", c.horizon_multiplier},
        {"horizon_min_ms", c.horizon_min_ms},
        {"horizon_max_ms", c.horizon_max_ms},
        {"kappa", c.kappa},
        {"alpha_up", c.alpha_up},
        {"alpha_down", c.alpha_down},
        {"beta_up", c.beta_up},
        {"beta_down", c.beta_down},
        {"dampening_epsilon", c.dampening_epsilon},
        {"trend_threshold_deg", c.trend_threshold_deg},
        {"risk_k", c.risk_k},
        {"scale_down_margin", c.scale_down_margin},
        {"min_instances", c.min_instances},
        {"max_instances", c.max_instances},
        {"max_step", c.max_step},
        {"spillover_cutoff", c.spillover_cutoff},
        {"processing_cooldown_ms", c.processing_cooldown_ms},
        {"window_ticks", c.window_ticks},
        {"metrics", metrics},
        {"cooldowns",
         {{"up_after_up_ms", optional_to_json(c.cooldowns.up_after_up)},
          {"up_after_down_ms", optional_to_json(c.cooldowns.up_after_down)},
          {"down_after_up_ms", optional_to_json(c.cooldowns.down_after_up)},
          {"down_after_down_ms", optional_to_json(c.cooldowns.down_after_down)}}},
        {"adaptive_timeout",
         {{"enabled", c.adaptive_timeout.enabled},
          {"window_size", c.adaptive_timeout.window_size},
          {"rate", c.adaptive_timeout.rate},
          {"factor_up", c.adaptive_timeout.factor_up},
          {"factor_down", c.adaptive_timeout.factor_down}}},
    };
}

} // namespace prescale
