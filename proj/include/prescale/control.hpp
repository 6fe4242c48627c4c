#pragma once

#include "prescale/common.hpp"

#include <deque>
#include <optional>

namespace prescale {

enum class ScaleDirection { Up, Down };

/// Each cooldown is optional; an absent value never blocks.
struct CooldownConfig {
    std::optional<TimeMs> up_after_up;
    std::optional<TimeMs> up_after_down;
    std::optional<TimeMs> down_after_up; // measured from the last instance that actually started
    std::optional<TimeMs> down_after_down;

    void validate() const;
    bool operator==(const CooldownConfig&) const = default;
};

struct ScalingHistory {
    std::optional<TimeMs> last_up_decision;
    std::optional<TimeMs> last_down_decision;
    std::optional<TimeMs> last_instance_started;
    int pending_scale_ups = 0;

    bool operator==(const ScalingHistory&) const = default;
};

/// Whether a change in `direction` is allowed at `now`.
bool gate(ScaleDirection direction, TimeMs now, const ScalingHistory& history, const CooldownConfig& config);

/**
 * Tracks observed startup times and nudges the init timeout toward their
 * median. Each update moves by at most T_I*rate*factor_up upward and
 * T_I*rate*factor_down downward.
 */
class InitTimeoutEstimator {
public:
    InitTimeoutEstimator(TimeMs initial, double rate = 0.2, double factor_up = 2.0, double factor_down = 1.0,
                         std::size_t window_size = 5);

    /// Appends one startup duration; throws InvalidInput if negative.
    void record(TimeMs measurement);
    void record_measurement(TimeMs decision_time, TimeMs registration_time);

    /// Moves T_I one clamped step toward the window median. No-op on an empty window.
    TimeMs update_timeout();

    TimeMs current() const { return current_; }
    std::optional<double> median() const;
    const std::deque<TimeMs>& window() const { return window_; }

    TimeMs max_increase() const;
    TimeMs max_decrease() const;

private:
    TimeMs current_;
    double rate_;
    double factor_up_;
    double factor_down_;
    std::size_t window_size_;
    std::deque<TimeMs> window_;
};

} // namespace prescale
