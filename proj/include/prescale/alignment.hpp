#pragma once

#include "prescale/common.hpp"

#include <optional>
#include <span>
#include <vector>

namespace prescale {

struct MetricSample {
    TimeMs timestamp = 0;
    double value = 0.0;

    bool operator==(const MetricSample&) const = default;
};

struct AlignedPoint {
    TimeMs tick = 0;
    double value = 0.0;

    bool operator==(const AlignedPoint&) const = default;
};

/// Per-instance alignment state; carries the last raw sample across batches.
struct AlignerState {
    std::optional<MetricSample> last_raw;
    std::optional<TimeMs> last_emitted_tick;

    bool operator==(const AlignerState&) const = default;
};

/**
 * Snap one batch of an instance's raw samples onto the grid of spacing `step`.
 *
 * Emits every tick t with prev.timestamp < t <= next.timestamp for each pair
 * of consecutive raw samples, linearly interpolated. The first raw sample ever
 * seen emits only when it sits exactly on the grid. Batches that are not
 * strictly increasing, or that start at or before the previous batch's last
 * sample, throw RejectedBatch and leave `state` unchanged.
 */
std::vector<AlignedPoint> align(AlignerState& state, std::span<const MetricSample> batch, TimeMs step);

} // namespace prescale
