#include "prescale/redistribution.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace prescale {

void validate(const RedistributionParams& params) {
    if (params.timeout <= 0) {
        throw ConfigError("redistribution timeout must be positive");
    }
    if (!(params.kappa > 0.0) || !std::isfinite(params.kappa)) {
        throw ConfigError("stabilization shape kappa must be positive");
    }
}

double stabilization_weight(TimeMs age, TimeMs timeout, double kappa) {
    validate(RedistributionParams{timeout, kappa});
    if (age <= 0) {
        return 0.0;
    }
    if (age >= timeout) {
        return 1.0;
    }
    const double fraction = static_cast<double>(age) / static_cast<double>(timeout);
    return std::expm1(kappa * fraction) / std::expm1(kappa);
}

double weighted_count(const InstanceRecords& records, TimeMs tick, const RedistributionParams& params) {
    double count = 0.0;
    for (const auto& [id, record] : records) {
        if (record.active_at(tick)) {
            count += stabilization_weight(tick - record.start_time, params.timeout, params.kappa);
        }
    }
    return count;
}

RedistributedTick redistribute(const std::map<InstanceId, double>& tick_values,
                               const InstanceRecords& records,
                               RedistributionState& state,
                               TimeMs tick,
                               const RedistributionParams& params,
                               const MetricModel& model) {
    validate(params);

    RedistributedTick out;
    out.tick = tick;
    out.instance_count = static_cast<int>(tick_values.size());

    std::map<InstanceId, double> weights;
    std::vector<WeightedValue> full;
    std::vector<WeightedValue> weighted;
    full.reserve(tick_values.size());
    weighted.reserve(tick_values.size());
    for (const auto& [id, value] : tick_values) {
        auto rec = records.find(id);
        if (rec == records.end()) {
            throw InvalidInput("redistribute: no instance record for " + id);
        }
        if (!rec->second.active_at(tick)) {
            throw InvalidInput("redistribute: instance " + id + " is not active at this tick");
        }
        const double w = stabilization_weight(tick - rec->second.start_time, params.timeout, params.kappa);
        weights[id] = w;
        full.push_back({value, 1.0});
        weighted.push_back({value, w});
        out.weighted_count += w;
    }

    out.raw_aggregate = model.aggregate(full);
    out.weighted_aggregate = model.aggregate(weighted);

    if (state.previous_aggregate && *state.previous_aggregate > out.weighted_aggregate) {
        out.aggregate = std::min(out.raw_aggregate, *state.previous_aggregate);
        out.drop_absorbed = true;
    } else {
        out.aggregate = out.weighted_aggregate;
    }

    // Delta: instances that were new at t-1, previous values re-weighted with
    // current weights minus the same values at previous weights.
    if (!out.drop_absorbed) {
        std::vector<WeightedValue> now_weighted;
        std::vector<WeightedValue> then_weighted;
        for (const auto& [id, prev_weight] : state.previous_weights) {
            if (prev_weight >= 1.0) {
                continue;
            }
            auto cur = weights.find(id);
            auto prev_value = state.previous_values.find(id);
            if (cur == weights.end() || prev_value == state.previous_values.end()) {
                continue;
            }
            now_weighted.push_back({prev_value->second, cur->second});
            then_weighted.push_back({prev_value->second, prev_weight});
        }
        if (!now_weighted.empty()) {
            out.delta = model.aggregate(now_weighted) - model.aggregate(then_weighted);
        }
    }

    state.previous_aggregate = out.aggregate;
    state.previous_weights = std::move(weights);
    state.previous_values = tick_values;
    return out;
}

} // namespace prescale
