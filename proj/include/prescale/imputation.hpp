#pragma once

#include "prescale/common.hpp"

#include <map>
#include <span>
#include <vector>

namespace prescale {

/// What is known at one grid tick: measured values and the instances that were active.
struct TickSnapshot {
    TimeMs tick = 0;
    std::map<InstanceId, double> known_values;
    std::vector<InstanceId> active;

    int active_count() const { return static_cast<int>(active.size()); }
};

struct ImputedTick {
    TimeMs tick = 0;
    std::map<InstanceId, double> imputed_values;
    double total = 0.0;
    double known_sum = 0.0;
    double unknown_sum = 0.0;
    int unknown_count = 0;

    bool operator==(const ImputedTick&) const = default;
};

/**
 * Forward imputation pass over a window of ticks.
 *
 * Known instances keep their measurement. The unknown contribution is carried
 * forward from the previous total: s^u_t = s_{t-1} - s*_{t-1}, where s*_{t-1}
 * sums the previous values of every instance that is known at t or no longer
 * active at t. Each unknown instance receives an equal share of s^u_t.
 *
 * `previous` seeds s_{t-1} for the first tick; without it the first tick is a
 * cold start and unknown instances are assigned 0. Known values of instances
 * absent from `active` are dropped. Negative s^u is clamped to 0.
 *
 * Throws InvalidWindow unless ticks are strictly increasing and uniformly spaced.
 */
std::vector<ImputedTick> impute_pass(std::span<const TickSnapshot> snapshots,
                                     const ImputedTick* previous = nullptr);

} // namespace prescale
