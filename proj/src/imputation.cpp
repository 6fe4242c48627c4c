#include "prescale/imputation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>

namespace prescale {

namespace {

void check_spacing(std::span<const TickSnapshot> snapshots, const ImputedTick* previous) {
    std::optional<TimeMs> spacing;
    if (snapshots.size() >= 2) {
        spacing = snapshots[1].tick - snapshots[0].tick;
        if (*spacing <= 0) {
            throw InvalidWindow("imputation ticks must be strictly increasing");
        }
        for (std::size_t i = 2; i < snapshots.size(); ++i) {
            if (snapshots[i].tick - snapshots[i - 1].tick != *spacing) {
                throw InvalidWindow("non-uniform tick spacing at tick " + std::to_string(snapshots[i].tick));
            }
        }
    }
    if (previous && !snapshots.empty()) {
        const TimeMs gap = snapshots.front().tick - previous->tick;
        if (gap <= 0 || (spacing && gap != *spacing)) {
            throw InvalidWindow("seed tick does not precede the window by one step");
        }
    }
}

} // namespace

std::vector<ImputedTick> impute_pass(std::span<const TickSnapshot> snapshots, const ImputedTick* previous) {
    check_spacing(snapshots, previous);

    std::vector<ImputedTick> out;
    out.reserve(snapshots.size());
    const ImputedTick* last = previous;

    for (const auto& snap : snapshots) {
        for (const auto& [id, value] : snap.known_values) {
            if (!std::isfinite(value)) {
                throw InvalidInput("imputation: non-finite value for instance " + id);
            }
        }

        ImputedTick cur;
        cur.tick = snap.tick;

        const std::set<InstanceId> active(snap.active.begin(), snap.active.end());
        std::vector<InstanceId> unknown;
        for (const auto& id : active) {
            auto it = snap.known_values.find(id);
            if (it != snap.known_values.end()) {
                cur.imputed_values[id] = it->second;
                cur.known_sum += it->second;
            } else {
                unknown.push_back(id);
            }
        }
        cur.unknown_count = static_cast<int>(unknown.size());

        if (last && !unknown.empty()) {
            // Previous contribution of everything that is not still unknown.
            double accounted = 0.0;
            for (const auto& [id, prev_value] : last->imputed_values) {
                const bool known_now = cur.imputed_values.contains(id);
                const bool departed = !active.contains(id);
                if (known_now || departed) {
                    accounted += prev_value;
                }
            }
            cur.unknown_sum = std::max(0.0, last->total - accounted);
        }

        const double share = unknown.empty() ? 0.0 : cur.unknown_sum / static_cast<double>(unknown.size());
        for (const auto& id : unknown) {
            cur.imputed_values[id] = share;
        }
        cur.total = cur.known_sum + cur.unknown_sum;

        out.push_back(std::move(cur));
        last = &out.back();
    }
    return out;
}

} // namespace prescale
