#pragma once

#include "prescale/common.hpp"
#include "prescale/metric_model.hpp"

#include <map>
#include <optional>

namespace prescale {

struct InstanceRecord {
    InstanceId id;
    TimeMs start_time = 0;
    std::optional<TimeMs> end_time;

    /// Active from its start through its termination tick, inclusive.
    bool active_at(TimeMs tick) const {
        return start_time <= tick && (!end_time || tick <= *end_time);
    }

    bool operator==(const InstanceRecord&) const = default;
};

using InstanceRecords = std::map<InstanceId, InstanceRecord>;

struct RedistributionParams {
    TimeMs timeout = 30'000; // T_R
    double kappa = 1.0;
};

struct RedistributionState {
    std::optional<double> previous_aggregate;
    std::map<InstanceId, double> previous_weights;
    std::map<InstanceId, double> previous_values;

    bool operator==(const RedistributionState&) const = default;
};

struct RedistributedTick {
    TimeMs tick = 0;
    double aggregate = 0.0;          // A_t
    double raw_aggregate = 0.0;      // A_t^r, all weights 1
    double weighted_aggregate = 0.0; // \hat A_t
    double delta = 0.0;              // redistribution delta
    double weighted_count = 0.0;     // N_t^w
    int instance_count = 0;          // N_t
    bool drop_absorbed = false;

    bool operator==(const RedistributedTick&) const = default;
};

/// w(a) = (e^{k a / T_R} - 1) / (e^k - 1), age clamped to [0, T_R].
double stabilization_weight(TimeMs age, TimeMs timeout, double kappa);

/// N^w over the records active at `tick`: stable instances count 1, new ones their weight.
double weighted_count(const InstanceRecords& records, TimeMs tick, const RedistributionParams& params);

/**
 * One redistribution step over the imputed per-instance values at `tick`.
 *
 * Produces the drop-absorbed aggregate, the redistribution delta for the
 * prediction stage and the contribution-weighted count, then advances `state`.
 * Throws InvalidInput when a value has no record or the record is not active.
 */
RedistributedTick redistribute(const std::map<InstanceId, double>& tick_values,
                               const InstanceRecords& records,
                               RedistributionState& state,
                               TimeMs tick,
                               const RedistributionParams& params,
                               const MetricModel& model);

void validate(const RedistributionParams& params);

} // namespace prescale
