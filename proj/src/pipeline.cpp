#include "prescale/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace prescale {

Pipeline::AppState::AppState(const ScalerConfig& c)
    : estimator(c.init_timeout_ms, c.adaptive_timeout.rate, c.adaptive_timeout.factor_up,
                c.adaptive_timeout.factor_down, c.adaptive_timeout.window_size) {}

int Pipeline::AppState::started() const {
    return static_cast<int>(std::count_if(records.begin(), records.end(),
                                          [](const auto& kv) { return !kv.second.end_time.has_value(); }));
}

Pipeline::Pipeline(ScalerConfig config) : config_(std::move(config)) {
    config_.validate();
    for (const auto& [id, m] : config_.metrics) {
        models_[id] = m.build();
    }
}

Pipeline::AppState& Pipeline::app_state(const ApplicationId& app) {
    auto it = apps_.find(app);
    if (it == apps_.end()) {
        it = apps_.emplace(app, AppState(config_)).first;
    }
    return it->second;
}

void Pipeline::register_locked(const ApplicationId& app, const InstanceId& id, TimeMs start_time, bool measured) {
    if (app.empty() || id.empty()) {
        throw InvalidInput("register: application and instance ids must be non-empty");
    }
    if (owner_.contains(id)) {
        throw InvalidInput("register: instance " + id + " is already known");
    }
    AppState& st = app_state(app);
    st.records[id] = InstanceRecord{id, start_time, std::nullopt};
    owner_[id] = app;
    if (!st.history.last_instance_started || *st.history.last_instance_started < start_time) {
        st.history.last_instance_started = start_time;
    }
    if (measured && !st.scale_up_times.empty()) {
        const TimeMs decided = st.scale_up_times.front();
        st.scale_up_times.pop_front();
        if (start_time >= decided) {
            st.estimator.record_measurement(decided, start_time);
            st.estimator.update_timeout();
        }
    }
    if (st.target) {
        st.history.pending_scale_ups = std::max(0, *st.target - st.started());
    }
}

void Pipeline::register_instance(const ApplicationId& app, const InstanceId& id, TimeMs start_time) {
    std::lock_guard lock(mutex_);
    register_locked(app, id, start_time, true);
}

void Pipeline::terminate_instance(const ApplicationId& app, const InstanceId& id, TimeMs end_time) {
    std::lock_guard lock(mutex_);
    auto owner = owner_.find(id);
    if (owner == owner_.end() || owner->second != app) {
        throw InvalidInput("terminate: unknown instance " + id + " for application " + app);
    }
    InstanceRecord& rec = apps_.at(app).records.at(id);
    if (rec.end_time) {
        throw InvalidInput("terminate: instance " + id + " already terminated");
    }
    if (end_time < rec.start_time) {
        throw InvalidInput("terminate: end time precedes start time for " + id);
    }
    rec.end_time = end_time;
    AppState& st = apps_.at(app);
    if (st.target) {
        st.history.pending_scale_ups = std::max(0, *st.target - st.started());
    }
}

IngestAck Pipeline::ingest(const SampleBatch& batch, TimeMs now) {
    std::lock_guard lock(mutex_);
    if (batch.instance_id.empty() || batch.application_id.empty()) {
        throw InvalidInput("batch: instance and application ids must be non-empty");
    }
    if (!models_.contains(batch.metric_id)) {
        throw InvalidInput("batch: unknown metric '" + batch.metric_id + "'");
    }
    for (std::size_t i = 0; i < batch.samples.size(); ++i) {
        const auto& s = batch.samples[i];
        if (s.timestamp < 0 || !std::isfinite(s.value)) {
            throw InvalidInput("batch from " + batch.instance_id + ": invalid sample at index " + std::to_string(i));
        }
        if (i > 0 && s.timestamp <= batch.samples[i - 1].timestamp) {
            throw InvalidInput("batch from " + batch.instance_id + ": timestamps not strictly increasing");
        }
    }

    auto owner = owner_.find(batch.instance_id);
    if (owner != owner_.end() && owner->second != batch.application_id) {
        throw InvalidInput("batch: instance " + batch.instance_id + " belongs to application " + owner->second);
    }
    if (retired_.contains(batch.instance_id)) {
        warnings_.push_back("dropped batch from retired instance " + batch.instance_id);
        return IngestAck{false, false};
    }
    if (batch.samples.empty()) {
        return IngestAck{false, false};
    }
    if (owner == owner_.end()) {
        register_locked(batch.application_id, batch.instance_id, batch.samples.front().timestamp, false);
        warnings_.push_back("auto-registered unknown instance " + batch.instance_id + " at " +
                            std::to_string(batch.samples.front().timestamp));
    }
    pending_.push_back(batch);

    const bool due = !last_cycle_ || now - *last_cycle_ >= config_.processing_cooldown_ms;
    return IngestAck{true, due};
}

bool Pipeline::has_pending() const {
    std::lock_guard lock(mutex_);
    return !pending_.empty();
}

bool Pipeline::cycle_due(TimeMs now) const {
    std::lock_guard lock(mutex_);
    return !pending_.empty() && (!last_cycle_ || now - *last_cycle_ >= config_.processing_cooldown_ms);
}

std::optional<TimeMs> Pipeline::next_cycle_time() const {
    std::lock_guard lock(mutex_);
    if (!last_cycle_) {
        return std::nullopt;
    }
    return *last_cycle_ + config_.processing_cooldown_ms;
}

void Pipeline::align_pending() {
    const TimeMs step = config_.sample_interval_ms;
    for (const auto& batch : pending_) {
        StreamState& stream = streams_[{batch.application_id, batch.metric_id}];
        std::vector<AlignedPoint> points;
        try {
            points = align(stream.aligners[batch.instance_id], batch.samples, step);
        } catch (const RejectedBatch& e) {
            warnings_.push_back("rejected batch from " + batch.instance_id + ": " + e.what());
            continue;
        }
        std::size_t late = 0;
        auto& series = stream.aligned[batch.instance_id];
        for (const auto& p : points) {
            if (stream.committed.tick && p.tick <= *stream.committed.tick) {
                ++late;
                continue;
            }
            series[p.tick] = p.value;
        }
        if (late > 0) {
            warnings_.push_back(std::to_string(late) + " ticks from " + batch.instance_id +
                                " arrived behind the committed window and were dropped");
        }
    }
    pending_.clear();
}

TimeMs Pipeline::init_timeout_locked(const AppState& st) const {
    return config_.adaptive_timeout.enabled ? st.estimator.current() : config_.init_timeout_ms;
}

std::optional<StreamDecision> Pipeline::evaluate(const ApplicationId& app, const MetricId& metric,
                                                 StreamState& stream, AppState& st) {
    (void)app;
    const TimeMs step = config_.sample_interval_ms;
    const MetricModel& model = *models_.at(metric);
    StreamCheckpoint& cp = stream.committed;

    std::optional<TimeMs> first;
    std::optional<TimeMs> last;
    for (const auto& [id, series] : stream.aligned) {
        if (series.empty()) {
            continue;
        }
        first = first ? std::min(*first, series.begin()->first) : series.begin()->first;
        last = last ? std::max(*last, series.rbegin()->first) : series.rbegin()->first;
    }
    if (!cp.tick && !first) {
        return std::nullopt;
    }
    const TimeMs start = cp.tick ? *cp.tick + step : *first;
    const TimeMs end = last ? std::max(*last, start - step) : start - step;

    std::vector<TickSnapshot> snapshots;
    for (TimeMs t = start; t <= end; t += step) {
        TickSnapshot snap;
        snap.tick = t;
        for (const auto& [id, rec] : st.records) {
            if (!rec.active_at(t)) {
                continue;
            }
            snap.active.push_back(id);
            auto series = stream.aligned.find(id);
            if (series == stream.aligned.end()) {
                continue;
            }
            auto v = series->second.find(t);
            if (v != series->second.end()) {
                snap.known_values[id] = v->second;
            }
        }
        snapshots.push_back(std::move(snap));
    }

    const std::vector<ImputedTick> imputed = impute_pass(snapshots, cp.imputed ? &*cp.imputed : nullptr);

    // Commit everything up to the last tick with complete data, and never
    // keep more than window_ticks uncommitted.
    TimeMs commit = start - step;
    for (const auto& it : imputed) {
        if (it.unknown_count != 0) {
            break;
        }
        commit = it.tick;
    }
    commit = std::max(commit, end - static_cast<TimeMs>(config_.window_ticks) * step);

    const RedistributionParams rp = config_.redistribution();
    const SmoothingParams sp = config_.smoothing();
    StreamCheckpoint work = cp;
    StreamCheckpoint next = cp;
    for (const auto& it : imputed) {
        RedistributedTick r = redistribute(it.imputed_values, st.records, work.redistribution, it.tick, rp, model);
        holt_update(work.holt, HoltInput{it.tick, r.aggregate, r.delta, r.raw_aggregate, r.instance_count}, sp,
                    model);
        work.tick = it.tick;
        work.imputed = it;
        work.last = r;
        if (it.tick == commit) {
            next = work;
        }
    }

    if (commit >= start) {
        cp = std::move(next);
        for (auto& [id, series] : stream.aligned) {
            series.erase(series.begin(), series.upper_bound(commit));
        }
    }

    if (!work.last) {
        return std::nullopt;
    }

    StreamDecision out;
    out.metric = metric;
    out.last_tick = *work.tick;
    out.tick = *work.last;
    const TimeMs h = horizon(init_timeout_locked(st), config_.horizon_multiplier, config_.horizon_min_ms,
                             config_.horizon_max_ms);
    out.forecast = extrapolate(work.holt, h, step);
    out.decision = decide(DecisionInputs{out.forecast, work.last->weighted_count, *st.target, step},
                          config_.decision(), model);
    return out;
}

CycleResult Pipeline::process_cycle(TimeMs now) {
    std::lock_guard lock(mutex_);
    last_cycle_ = now;
    align_pending();

    CycleResult result;
    result.now = now;
    for (auto& [key, stream] : streams_) {
        AppState& st = app_state(key.first);
        if (!st.target) {
            st.target = std::clamp(st.started(), config_.min_instances, config_.max_instances);
        }
        if (auto d = evaluate(key.first, key.second, stream, st)) {
            result.applications[key.first].streams.push_back(std::move(*d));
        }
    }

    for (auto& [app, ad] : result.applications) {
        AppState& st = apps_.at(app);
        ad.previous = *st.target;
        std::vector<int> targets;
        for (const auto& s : ad.streams) {
            targets.push_back(s.decision.target);
        }
        ad.proposed = merge_targets(targets);
        st.history.pending_scale_ups = std::max(0, *st.target - st.started());

        if (ad.proposed != ad.previous) {
            const ScaleDirection dir = ad.proposed > ad.previous ? ScaleDirection::Up : ScaleDirection::Down;
            if (gate(dir, now, st.history, config_.cooldowns)) {
                if (dir == ScaleDirection::Up) {
                    st.history.last_up_decision = now;
                    for (int i = ad.previous; i < ad.proposed; ++i) {
                        st.scale_up_times.push_back(now);
                    }
                } else {
                    st.history.last_down_decision = now;
                }
                st.target = ad.proposed;
            } else {
                ad.gated = true;
            }
        }
        ad.target = *st.target;
        st.history.pending_scale_ups = std::max(0, *st.target - st.started());
        while (static_cast<int>(st.scale_up_times.size()) > st.history.pending_scale_ups) {
            st.scale_up_times.pop_front();
        }
        ad.pending = st.history.pending_scale_ups;
        ad.init_timeout = init_timeout_locked(st);
    }

    prune_retired();
    return result;
}

void Pipeline::prune_retired() {
    // A terminated instance can go once every stream of its application has
    // committed past its end time.
    for (auto& [app, st] : apps_) {
        std::optional<TimeMs> horizon_tick;
        bool any_stream = false;
        for (const auto& [key, stream] : streams_) {
            if (key.first != app) {
                continue;
            }
            any_stream = true;
            const TimeMs t = stream.committed.tick.value_or(std::numeric_limits<TimeMs>::min());
            horizon_tick = horizon_tick ? std::min(*horizon_tick, t) : t;
        }
        if (!any_stream) {
            continue;
        }
        for (auto it = st.records.begin(); it != st.records.end();) {
            const auto& rec = it->second;
            if (rec.end_time && *rec.end_time < *horizon_tick) {
                for (auto& [key, stream] : streams_) {
                    if (key.first == app) {
                        stream.aligned.erase(it->first);
                        stream.aligners.erase(it->first);
                        stream.committed.redistribution.previous_weights.erase(it->first);
                        stream.committed.redistribution.previous_values.erase(it->first);
                    }
                }
                owner_.erase(it->first);
                retired_.insert(it->first);
                it = st.records.erase(it);
            } else {
                ++it;
            }
        }
    }
}

std::vector<std::string> Pipeline::drain_warnings() {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    out.swap(warnings_);
    return out;
}

int Pipeline::target(const ApplicationId& app) const {
    std::lock_guard lock(mutex_);
    auto it = apps_.find(app);
    if (it == apps_.end() || !it->second.target) {
        return 0;
    }
    return *it->second.target;
}

int Pipeline::started(const ApplicationId& app) const {
    std::lock_guard lock(mutex_);
    auto it = apps_.find(app);
    return it == apps_.end() ? 0 : it->second.started();
}

TimeMs Pipeline::init_timeout(const ApplicationId& app) const {
    std::lock_guard lock(mutex_);
    auto it = apps_.find(app);
    return it == apps_.end() ? config_.init_timeout_ms : init_timeout_locked(it->second);
}

std::optional<StreamState> Pipeline::stream_state(const ApplicationId& app, const MetricId& metric) const {
    std::lock_guard lock(mutex_);
    auto it = streams_.find({app, metric});
    if (it == streams_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<ScalingHistory> Pipeline::history(const ApplicationId& app) const {
    std::lock_guard lock(mutex_);
    auto it = apps_.find(app);
    if (it == apps_.end()) {
        return std::nullopt;
    }
    return it->second.history;
}

std::string trace_header() {
    return "now_ms,application,metric,last_tick,aggregate,level,trend,predicted,weighted_count,direction,path,"
           "stream_target,app_target,gated";
}

std::vector<std::string> trace_lines(const CycleResult& result) {
    std::vector<std::string> lines;
    for (const auto& [app, ad] : result.applications) {
        for (const auto& s : ad.streams) {
            char buf[512];
            std::snprintf(buf, sizeof buf, "%lld,%s,%s,%lld,%.6f,%.6f,%.6f,%.6f,%.6f,%s,%s,%d,%d,%d",
                          static_cast<long long>(result.now), app.c_str(), s.metric.c_str(),
                          static_cast<long long>(s.last_tick), s.tick.aggregate, s.forecast.level,
                          s.forecast.trend, s.forecast.predicted, s.tick.weighted_count,
                          std::string(to_string(s.decision.direction)).c_str(),
                          std::string(to_string(s.decision.path)).c_str(), s.decision.target, ad.target,
                          ad.gated ? 1 : 0);
            lines.emplace_back(buf);
        }
    }
    return lines;
}

} // namespace prescale
