#include "prescale/alignment.hpp"

#include <cmath>
#include <string>

namespace prescale {

namespace {

void validate(const AlignerState& state, std::span<const MetricSample> batch, TimeMs step) {
    if (step <= 0) {
        throw RejectedBatch("grid step must be positive");
    }
    std::optional<TimeMs> previous;
    if (state.last_raw) {
        previous = state.last_raw->timestamp;
    }
    for (const auto& sample : batch) {
        if (sample.timestamp < 0) {
            throw RejectedBatch("negative timestamp " + std::to_string(sample.timestamp));
        }
        if (!std::isfinite(sample.value)) {
            throw RejectedBatch("non-finite value at " + std::to_string(sample.timestamp));
        }
        if (previous && sample.timestamp <= *previous) {
            throw RejectedBatch("out-of-order or duplicate timestamp " + std::to_string(sample.timestamp));
        }
        previous = sample.timestamp;
    }
}

} // namespace

std::vector<AlignedPoint> align(AlignerState& state, std::span<const MetricSample> batch, TimeMs step) {
    validate(state, batch, step);

    std::vector<AlignedPoint> out;
    for (const auto& next : batch) {
        if (!state.last_raw) {
            if (next.timestamp % step == 0) {
                out.push_back({next.timestamp, next.value});
                state.last_emitted_tick = next.timestamp;
            }
            state.last_raw = next;
            continue;
        }

        const MetricSample prev = *state.last_raw;
        TimeMs tick = (prev.timestamp / step) * step + step;
        if (state.last_emitted_tick && tick <= *state.last_emitted_tick) {
            tick = *state.last_emitted_tick + step;
        }
        const double span = static_cast<double>(next.timestamp - prev.timestamp);
        for (; tick <= next.timestamp; tick += step) {
            double value = next.value;
            if (tick != next.timestamp) {
                const double lambda = static_cast<double>(tick - prev.timestamp) / span;
                value = prev.value + (next.value - prev.value) * lambda;
            }
            out.push_back({tick, value});
            state.last_emitted_tick = tick;
        }
        state.last_raw = next;
    }
    return out;
}

} // namespace prescale
