#pragma once

#include "prescale/alignment.hpp"
#include "prescale/config.hpp"
#include "prescale/control.hpp"
#include "prescale/decision.hpp"
#include "prescale/imputation.hpp"
#include "prescale/prediction.hpp"
#include "prescale/redistribution.hpp"

#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace prescale {

using ApplicationId = std::string;
using MetricId = std::string;

struct SampleBatch {
    InstanceId instance_id;
    ApplicationId application_id;
    MetricId metric_id;
    std::vector<MetricSample> samples;
    TimeMs sent_at = 0;

    bool operator==(const SampleBatch&) const = default;
};

struct IngestAck {
    bool stored = false;
    bool cycle_due = false;
};

/// State that survives between cycles for one (application, metric) stream.
struct StreamCheckpoint {
    std::optional<TimeMs> tick; // last committed tick
    std::optional<ImputedTick> imputed;
    RedistributionState redistribution;
    HoltState holt;
    std::optional<RedistributedTick> last;

    bool operator==(const StreamCheckpoint&) const = default;
};

struct StreamState {
    std::map<InstanceId, AlignerState> aligners;
    std::map<InstanceId, std::map<TimeMs, double>> aligned; // retained ticks after the checkpoint
    StreamCheckpoint committed;

    bool operator==(const StreamState&) const = default;
};

struct StreamDecision {
    MetricId metric;
    TimeMs last_tick = 0;
    RedistributedTick tick;
    Forecast forecast;
    Decision decision;
};

struct AppDecision {
    int previous = 0;
    int proposed = 0;
    int target = 0;
    bool gated = false;
    int pending = 0;
    TimeMs init_timeout = 0;
    std::vector<StreamDecision> streams;
};

struct CycleResult {
    TimeMs now = 0;
    std::map<ApplicationId, AppDecision> applications;
};

/**
 * Batches in, target counts out.
 *
 * Batches are stored on ingest and processed together by process_cycle. Each
 * stream keeps a committed checkpoint; every cycle replays the ticks after it
 * (at most window_ticks), so late batches revise imputed values for the
 * retained window. All time is injected by the caller.
 *
 * Thread-safe: every public member takes the same lock.
 */
class Pipeline {
public:
    explicit Pipeline(ScalerConfig config);

    const ScalerConfig& config() const { return config_; }

    /// An instance became ready. Also feeds the init-timeout estimator.
    void register_instance(const ApplicationId& app, const InstanceId& id, TimeMs start_time);
    void terminate_instance(const ApplicationId& app, const InstanceId& id, TimeMs end_time);

    /// Throws InvalidInput for malformed batches or unknown metrics.
    IngestAck ingest(const SampleBatch& batch, TimeMs now);

    bool cycle_due(TimeMs now) const;
    std::optional<TimeMs> next_cycle_time() const;
    bool has_pending() const;

    CycleResult process_cycle(TimeMs now);

    std::vector<std::string> drain_warnings();

    int target(const ApplicationId& app) const;
    int started(const ApplicationId& app) const;
    TimeMs init_timeout(const ApplicationId& app) const;
    std::optional<StreamState> stream_state(const ApplicationId& app, const MetricId& metric) const;
    std::optional<ScalingHistory> history(const ApplicationId& app) const;

private:
    struct AppState {
        InstanceRecords records;
        std::optional<int> target;
        ScalingHistory history;
        InitTimeoutEstimator estimator;
        std::deque<TimeMs> scale_up_times; // one entry per requested instance

        explicit AppState(const ScalerConfig& c);
        int started() const;
    };

    AppState& app_state(const ApplicationId& app);
    void register_locked(const ApplicationId& app, const InstanceId& id, TimeMs start_time, bool measured);
    void align_pending();
    std::optional<StreamDecision> evaluate(const ApplicationId& app, const MetricId& metric, StreamState& stream,
                                           AppState& state);
    TimeMs init_timeout_locked(const AppState& state) const;
    void prune_retired();

    ScalerConfig config_;
    std::map<MetricId, MetricModelPtr> models_;
    std::map<ApplicationId, AppState> apps_;
    std::map<InstanceId, ApplicationId> owner_;
    std::set<InstanceId> retired_;
    std::map<std::pair<ApplicationId, MetricId>, StreamState> streams_;
    std::vector<SampleBatch> pending_;
    std::optional<TimeMs> last_cycle_;
    std::vector<std::string> warnings_;
    mutable std::mutex mutex_;
};

/// Header and rows of the per-stream decision trace, fixed six-decimal formatting.
std::string trace_header();
std::vector<std::string> trace_lines(const CycleResult& result);

} // namespace prescale
