#include "prescale/control.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace prescale {

namespace {

bool within(std::optional<TimeMs> cooldown, std::optional<TimeMs> since, TimeMs now) {
    return cooldown && since && now - *since < *cooldown;
}

} // namespace

void CooldownConfig::validate() const {
    for (const auto& c : {up_after_up, up_after_down, down_after_up, down_after_down}) {
        if (c && *c < 0) {
            throw ConfigError("cooldowns must be non-negative");
        }
    }
}

bool gate(ScaleDirection direction, TimeMs now, const ScalingHistory& h, const CooldownConfig& c) {
    if (direction == ScaleDirection::Up) {
        return !within(c.up_after_up, h.last_up_decision, now) && !within(c.up_after_down, h.last_down_decision, now);
    }
    if (h.pending_scale_ups > 0) {
        return false;
    }
    return !within(c.down_after_up, h.last_instance_started, now) &&
           !within(c.down_after_down, h.last_down_decision, now);
}

InitTimeoutEstimator::InitTimeoutEstimator(TimeMs initial, double rate, double factor_up, double factor_down,
                                           std::size_t window_size)
    : current_(initial), rate_(rate), factor_up_(factor_up), factor_down_(factor_down), window_size_(window_size) {
    if (initial <= 0) {
        throw ConfigError("initial init timeout must be positive");
    }
    if (!(rate > 0.0)) {
        throw ConfigError("adaptive timeout rate must be positive");
    }
    if (!(factor_down > 0.0) || factor_up < factor_down) {
        throw ConfigError("adaptive timeout factors must satisfy factor_up >= factor_down > 0");
    }
    if (window_size == 0) {
        throw ConfigError("adaptive timeout window must hold at least one measurement");
    }
}

void InitTimeoutEstimator::record(TimeMs measurement) {
    if (measurement < 0) {
        throw InvalidInput("startup measurement must be non-negative");
    }
    window_.push_back(measurement);
    while (window_.size() > window_size_) {
        window_.pop_front();
    }
}

void InitTimeoutEstimator::record_measurement(TimeMs decision_time, TimeMs registration_time) {
    record(registration_time - decision_time);
}

std::optional<double> InitTimeoutEstimator::median() const {
    if (window_.empty()) {
        return std::nullopt;
    }
    std::vector<TimeMs> sorted(window_.begin(), window_.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    if (sorted.size() % 2 == 1) {
        return static_cast<double>(sorted[mid]);
    }
    return (static_cast<double>(sorted[mid - 1]) + static_cast<double>(sorted[mid])) / 2.0;
}

TimeMs InitTimeoutEstimator::max_increase() const {
    return std::llround(static_cast<double>(current_) * rate_ * factor_up_);
}

TimeMs InitTimeoutEstimator::max_decrease() const {
    return std::llround(static_cast<double>(current_) * rate_ * factor_down_);
}

TimeMs InitTimeoutEstimator::update_timeout() {
    const auto m = median();
    if (!m) {
        return current_;
    }
    const double t = static_cast<double>(current_);
    const double step = std::clamp(*m - t, -t * rate_ * factor_down_, t * rate_ * factor_up_);
    // 1 ms floor keeps T_I positive even with rate*factor_down >= 1.
    current_ = std::max<TimeMs>(1, std::llround(t + step));
    return current_;
}

} // namespace prescale
