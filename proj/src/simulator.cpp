#include "prescale/simulator.hpp"

#include "prescale/batch_log.hpp"
#include "prescale/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <queue>
#include <sstream>

namespace prescale {

using nlohmann::json;

std::string_view to_string(ScalerKind kind) {
    switch (kind) {
    case ScalerKind::Predictive: return "predictive";
    case ScalerKind::ReactiveElu: return "reactive-elu";
    case ScalerKind::ReactiveCpu: return "reactive-cpu";
    }
    return "?";
}

ScalerKind parse_scaler_kind(std::string_view text) {
    if (text == "predictive") return ScalerKind::Predictive;
    if (text == "reactive-elu") return ScalerKind::ReactiveElu;
    if (text == "reactive-cpu") return ScalerKind::ReactiveCpu;
    throw ConfigError("unknown scaler '" + std::string(text) + "' (predictive, reactive-elu, reactive-cpu)");
}

double WorkloadProfile::rate_at(TimeMs t) const {
    if (points.empty()) {
        return 0.0;
    }
    if (t <= points.front().time) {
        return points.front().rps;
    }
    for (std::size_t i = 1; i < points.size(); ++i) {
        const auto& a = points[i - 1];
        const auto& b = points[i];
        if (t <= b.time) {
            const double f = static_cast<double>(t - a.time) / static_cast<double>(b.time - a.time);
            return a.rps + (b.rps - a.rps) * f;
        }
    }
    return points.back().rps;
}

void WorkloadProfile::validate() const {
    if (points.empty()) {
        throw ConfigError("scenario.profile: at least one point is required");
    }
    if (points.front().time != 0) {
        throw ConfigError("scenario.profile: the first point must be at time 0");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i].rps >= 0.0) || !std::isfinite(points[i].rps)) {
            throw ConfigError("scenario.profile[" + std::to_string(i) + "]: rate must be finite and >= 0");
        }
        if (i > 0 && points[i].time <= points[i - 1].time) {
            throw ConfigError("scenario.profile[" + std::to_string(i) + "]: times must be strictly increasing");
        }
    }
}

void SimulationParams::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) {
            throw ConfigError(std::string("scenario.simulation.") + what);
        }
    };
    require(warmup_ms >= 0, "warmup_ms: must be non-negative");
    require(initial_instances >= 0, "initial_instances: must be non-negative");
    require(service_time_ms > 0.0, "service_time_ms: must be positive");
    require(service_jitter >= 0.0 && service_jitter < 1.0, "service_jitter: must lie in [0,1)");
    require(client_timeout_ms > 0, "client_timeout_ms: must be positive");
    require(start_delay_ms >= 0, "start_delay_ms: must be non-negative");
    require(start_delay_spread_ms >= 0 && start_delay_spread_ms <= start_delay_ms,
            "start_delay_spread_ms: must lie in [0, start_delay_ms]");
    require(slow_start_ms >= 0, "slow_start_ms: must be non-negative");
    require(slow_start_min_weight > 0.0 && slow_start_min_weight <= 1.0, "slow_start_min_weight: must lie in (0,1]");
    require(short_batch_ms > 0 && long_batch_ms >= short_batch_ms, "long_batch_ms: must be >= short_batch_ms > 0");
    require(network_delay_min_ms >= 0 && network_delay_max_ms >= network_delay_min_ms,
            "network_delay_max_ms: must be >= network_delay_min_ms >= 0");
    require(reactive_poll_ms > 0, "reactive_poll_ms: must be positive");
    require(reactive_stabilization_ms >= 0, "reactive_stabilization_ms: must be non-negative");
    require(cpu_scale > 0.0, "cpu_scale: must be positive");
    require(cpu_noise >= 0.0, "cpu_noise: must be non-negative");
    require(latency_window_ms > 0, "latency_window_ms: must be positive");
}

ScalerConfig scenario_scaler_defaults() {
    ScalerConfig c;
    c.min_instances = 4;
    c.max_instances = 20;
    c.cooldowns.down_after_up = c.redistribution_timeout_ms;
    return c;
}

Scenario parse_scenario(const json& j) {
    JsonFields f(j, "scenario");
    Scenario s;
    s.name = f.string("name", s.name);
    s.scaler_kind = parse_scaler_kind(f.string("scaler_kind", std::string(to_string(s.scaler_kind))));

    const json* profile = f.child("profile");
    if (!profile || !profile->is_array()) {
        throw ConfigError("scenario.profile: required array of [time_ms, requests_per_second]");
    }
    for (std::size_t i = 0; i < profile->size(); ++i) {
        const json& p = (*profile)[i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number()) {
            throw ConfigError("scenario.profile[" + std::to_string(i) + "]: expected [time_ms, requests_per_second]");
        }
        s.profile.points.push_back({p[0].get<TimeMs>(), p[1].get<double>()});
    }
    s.profile.validate();

    if (const json* sim = f.child("simulation")) {
        JsonFields g(*sim, "scenario.simulation");
        SimulationParams& p = s.sim;
        const TimeMs seed = g.integer("seed", static_cast<TimeMs>(p.seed));
        if (seed < 0) {
            throw ConfigError(g.field("seed") + ": must be non-negative");
        }
        p.seed = static_cast<std::uint64_t>(seed);
        p.warmup_ms = g.integer("warmup_ms", p.warmup_ms);
        p.initial_instances = static_cast<int>(g.integer("initial_instances", p.initial_instances));
        p.service_time_ms = g.number("service_time_ms", p.service_time_ms);
        p.service_jitter = g.number("service_jitter", p.service_jitter);
        p.client_timeout_ms = g.integer("client_timeout_ms", p.client_timeout_ms);
        p.start_delay_ms = g.integer("start_delay_ms", p.start_delay_ms);
        p.start_delay_spread_ms = g.integer("start_delay_spread_ms", p.start_delay_spread_ms);
        p.slow_start_ms = g.integer("slow_start_ms", p.slow_start_ms);
        p.slow_start_min_weight = g.number("slow_start_min_weight", p.slow_start_min_weight);
        p.short_batch_ms = g.integer("short_batch_ms", p.short_batch_ms);
        p.long_batch_ms = g.integer("long_batch_ms", p.long_batch_ms);
        p.network_delay_min_ms = g.integer("network_delay_min_ms", p.network_delay_min_ms);
        p.network_delay_max_ms = g.integer("network_delay_max_ms", p.network_delay_max_ms);
        p.reactive_poll_ms = g.integer("reactive_poll_ms", p.reactive_poll_ms);
        p.reactive_stabilization_ms = g.integer("reactive_stabilization_ms", p.reactive_stabilization_ms);
        p.cpu_scale = g.number("cpu_scale", p.cpu_scale);
        p.cpu_noise = g.number("cpu_noise", p.cpu_noise);
        p.latency_window_ms = g.integer("latency_window_ms", p.latency_window_ms);
        g.finish();
    }
    s.sim.validate();

    if (const json* scaler = f.child("scaler")) {
        s.scaler = parse_scaler_config(*scaler, "scenario.scaler", scenario_scaler_defaults());
    } else {
        s.scaler = scenario_scaler_defaults();
    }
    f.finish();

    if (s.sim.initial_instances > s.scaler.max_instances) {
        throw ConfigError("scenario.simulation.initial_instances: exceeds scaler.max_instances");
    }
    if (!s.scaler.metrics.contains("elu")) {
        throw ConfigError("scenario.scaler.metrics: the simulator reports metric 'elu'");
    }
    return s;
}

json to_json(const Scenario& s) {
    json profile = json::array();
    for (const auto& p : s.profile.points) {
        profile.push_back(json::array({p.time, p.rps}));
    }
    const SimulationParams& p = s.sim;
    return {
        {"name", s.name},
        {"scaler_kind", std::string(to_string(s.scaler_kind))},
        {"profile", profile},
        {"simulation",
         {{"seed", p.seed},
          {"warmup_ms", p.warmup_ms},
          {"initial_instances", p.initial_instances},
          {"service_time_ms", p.service_time_ms},
          {"service_jitter", p.service_jitter},
          {"client_timeout_ms", p.client_timeout_ms},
          {"start_delay_ms", p.start_delay_ms},
          {"start_delay_spread_ms", p.start_delay_spread_ms},
          {"slow_start_ms", p.slow_start_ms},
          {"slow_start_min_weight", p.slow_start_min_weight},
          {"short_batch_ms", p.short_batch_ms},
          {"long_batch_ms", p.long_batch_ms},
          {"network_delay_min_ms", p.network_delay_min_ms},
          {"network_delay_max_ms", p.network_delay_max_ms},
          {"reactive_poll_ms", p.reactive_poll_ms},
          {"reactive_stabilization_ms", p.reactive_stabilization_ms},
          {"cpu_scale", p.cpu_scale},
          {"cpu_noise", p.cpu_noise},
          {"latency_window_ms", p.latency_window_ms}}},
        {"scaler", to_json(s.scaler)},
    };
}

Scenario builtin_scenario(std::string_view name) {
    Scenario s;
    s.name = std::string(name);
    s.scaler = scenario_scaler_defaults();
    if (name == "ramp") {
        s.profile.points = {{0, 10.0}, {150'000, 800.0}, {240'000, 800.0}};
    } else if (name == "spike") {
        s.profile.points = {{0, 0.0}, {10'000, 800.0}, {130'000, 800.0}};
    } else if (name == "zero") {
        s.profile.points = {{0, 0.0}, {120'000, 0.0}};
    } else {
        throw ConfigError("unknown built-in scenario '" + std::string(name) + "' (ramp, spike, zero)");
    }
    return s;
}

int reactive_step(std::span<const double> values, double threshold, int min_instances, int max_instances) {
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    const double need = std::ceil(sum / threshold);
    if (need <= static_cast<double>(min_instances)) {
        return min_instances;
    }
    if (need >= static_cast<double>(max_instances)) {
        return max_instances;
    }
    return static_cast<int>(need);
}

TimeMs batch_timeout(std::span<const double> values, double threshold, TimeMs short_timeout, TimeMs long_timeout) {
    for (double v : values) {
        if (v > threshold) {
            return short_timeout;
        }
    }
    return long_timeout;
}

std::optional<int> recovery_ticks(const std::vector<TraceRow>& rows, double limit, int hold) {
    std::size_t first_saturated = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].mean_metric >= 0.95) {
            first_saturated = i;
            break;
        }
    }
    if (first_saturated == rows.size()) {
        return std::nullopt;
    }
    int run = 0;
    for (std::size_t i = first_saturated; i < rows.size(); ++i) {
        run = rows[i].mean_metric <= limit ? run + 1 : 0;
        if (run == hold) {
            return static_cast<int>(i + 1 - static_cast<std::size_t>(hold) - first_saturated);
        }
    }
    return std::nullopt;
}

namespace {

using Micros = std::int64_t;

constexpr Micros kUs = 1000; // microseconds per millisecond

enum class EventKind { Arrival, ServiceDone, Sample, Deliver, CycleTimer, PodReady, Poll, TraceTick, End };

struct Event {
    Micros time = 0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::End;
    int index = 0;

    bool operator>(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
};

enum class PodState { Starting, Ready, Draining, Gone };

struct Request {
    Micros arrival = 0;
};

struct Pod {
    std::string id;
    PodState state = PodState::Starting;
    Micros created = 0;
    Micros ready = 0;
    TimeMs phase_ms = 0;
    std::deque<Request> queue;
    bool busy = false;
    Request serving;
    Micros busy_since = 0;
    Micros busy_total = 0;
    Micros busy_at_sample = 0;
    Micros last_sample = 0;
    double last_elu = 0.0;
    double last_cpu = 0.0;
    std::vector<MetricSample> batch;
    Micros batch_start = 0;
    Micros batch_backdate = 0;
};

struct Completion {
    Micros time = 0;
    double latency_ms = 0.0;
};

double percentile(std::vector<double>& values, double q) {
    if (values.empty()) {
        return 0.0;
    }
    // Nearest-rank on the sorted sample.
    std::sort(values.begin(), values.end());
    const double rank = std::ceil(q * static_cast<double>(values.size()));
    const std::size_t idx = rank < 1.0 ? 0 : static_cast<std::size_t>(rank) - 1;
    return values[std::min(idx, values.size() - 1)];
}

class Simulation {
public:
    explicit Simulation(const Scenario& s)
        : sc_(s),
          p_(s.sim),
          cfg_(s.scaler),
          pipeline_(s.scaler),
          log_(log_stream_),
          arrivals_(Rng::derive(p_.seed, 1)),
          routing_(Rng::derive(p_.seed, 2)),
          service_(Rng::derive(p_.seed, 3)),
          startup_(Rng::derive(p_.seed, 4)),
          noise_(Rng::derive(p_.seed, 5)),
          network_(Rng::derive(p_.seed, 6)),
          phases_(Rng::derive(p_.seed, 7)) {}

    SimulationResult run();

private:
    static constexpr const char* kApp = "app";
    static constexpr const char* kMetric = "elu";

    Micros warmup() const { return p_.warmup_ms * kUs; }
    Micros end_time() const { return warmup() + sc_.profile.end() * kUs; }
    double rate_at_sim(double t_s) const;
    std::optional<Micros> next_arrival(Micros from);

    void schedule(Micros t, EventKind kind, int index = 0) { events_.push({t, seq_++, kind, index}); }

    int create_pod(Micros now, bool immediate);
    void make_ready(int pod, Micros now);
    void route(Micros now);
    void start_next(int pod, Micros now);
    void finish_request(const Request& r, Micros now, bool served);
    void sample(int pod, Micros now);
    void send_batch(Pod& pod, Micros now);
    void deliver(int index, Micros now);
    void run_cycle(Micros now);
    void poll(Micros now);
    void apply_target(int desired, Micros now);
    void begin_drain(int pod, Micros now);
    void maybe_retire(int pod);
    void trace_tick(Micros now);
    int active_count() const;

    const Scenario& sc_;
    const SimulationParams& p_;
    const ScalerConfig& cfg_;
    Pipeline pipeline_;
    std::ostringstream log_stream_;
    BatchLogWriter log_;
    std::ostringstream decisions_;
    Rng arrivals_, routing_, service_, startup_, noise_, network_, phases_;

    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
    std::uint64_t seq_ = 0;
    std::vector<Pod> pods_;
    std::vector<SampleBatch> in_transit_;
    std::optional<Micros> cycle_timer_;
    int desired_ = 0;
    std::deque<std::pair<Micros, int>> recommendations_;

    std::vector<Completion> completions_;
    std::vector<double> profile_latencies_;
    std::size_t window_begin_ = 0;
    std::uint64_t total_issued_ = 0, total_served_ = 0, total_errors_ = 0;
    std::uint64_t issued_ = 0, served_ = 0, errors_ = 0;
    std::vector<TraceRow> trace_;
    std::vector<double> utilization_;
};

double Simulation::rate_at_sim(double t_s) const {
    const double profile_ms = t_s * 1000.0 - static_cast<double>(p_.warmup_ms);
    if (profile_ms <= 0.0) {
        return sc_.profile.points.front().rps;
    }
    const auto& pts = sc_.profile.points;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (profile_ms <= static_cast<double>(pts[i].time)) {
            const double a = static_cast<double>(pts[i - 1].time);
            const double b = static_cast<double>(pts[i].time);
            return pts[i - 1].rps + (pts[i].rps - pts[i - 1].rps) * (profile_ms - a) / (b - a);
        }
    }
    return pts.back().rps;
}

// Integrates the rate forward from `from` until it has accumulated a uniform
// [0.5, 1.5) share of one request, so the profile is met in expectation.
std::optional<Micros> Simulation::next_arrival(Micros from) {
    double need = arrivals_.uniform(0.5, 1.5);
    std::vector<double> breaks{static_cast<double>(warmup()) / 1e6};
    for (const auto& pt : sc_.profile.points) {
        breaks.push_back(static_cast<double>(warmup() + pt.time * kUs) / 1e6);
    }
    const double end_s = static_cast<double>(end_time()) / 1e6;
    double t = static_cast<double>(from) / 1e6;
    while (t < end_s) {
        double seg_end = end_s;
        for (double b : breaks) {
            if (b > t) {
                seg_end = std::min(seg_end, b);
                break;
            }
        }
        const double r0 = rate_at_sim(t);
        const double r1 = rate_at_sim(seg_end);
        const double len = seg_end - t;
        const double slope = len > 0.0 ? (r1 - r0) / len : 0.0;
        const double area = r0 * len + 0.5 * slope * len * len;
        if (area >= need && area > 0.0) {
            const double disc = std::max(0.0, r0 * r0 + 2.0 * slope * need);
            const double dt = 2.0 * need / (r0 + std::sqrt(disc));
            const auto at = static_cast<Micros>(std::llround((t + dt) * 1e6));
            return std::max(at, from + 1);
        }
        need -= area;
        t = seg_end;
    }
    return std::nullopt;
}

int Simulation::create_pod(Micros now, bool immediate) {
    Pod pod;
    pod.id = "pod-" + std::to_string(pods_.size());
    pod.created = now;
    pod.phase_ms = phases_.uniform_int(0, 999);
    pods_.push_back(std::move(pod));
    const int idx = static_cast<int>(pods_.size()) - 1;
    if (immediate) {
        // Pods present at start have been running for a while: spread their batch windows.
        pods_.back().batch_backdate = phases_.uniform_int(0, p_.long_batch_ms - 1) * kUs;
        make_ready(idx, now);
    } else {
        const double lo = static_cast<double>(p_.start_delay_ms - p_.start_delay_spread_ms);
        const double hi = static_cast<double>(p_.start_delay_ms + p_.start_delay_spread_ms);
        const double delay_ms = startup_.triangular(lo, static_cast<double>(p_.start_delay_ms), hi);
        schedule(now + static_cast<Micros>(std::llround(delay_ms)) * kUs, EventKind::PodReady, idx);
    }
    return idx;
}

void Simulation::make_ready(int idx, Micros now) {
    Pod& pod = pods_[static_cast<std::size_t>(idx)];
    if (pod.state != PodState::Starting) {
        return; // cancelled while starting
    }
    pod.state = PodState::Ready;
    pod.ready = now;
    pod.last_sample = now;
    const TimeMs now_ms = now / kUs;
    log_.register_instance(now_ms, kApp, pod.id);
    pipeline_.register_instance(kApp, pod.id, now_ms);

    TimeMs first = (now_ms / 1000) * 1000 + pod.phase_ms;
    if (first * kUs <= now) {
        first += 1000;
    }
    schedule(first * kUs, EventKind::Sample, idx);
}

int Simulation::active_count() const {
    int n = 0;
    for (const auto& pod : pods_) {
        if (pod.state == PodState::Starting || pod.state == PodState::Ready) {
            ++n;
        }
    }
    return n;
}

void Simulation::route(Micros now) {
    Request req{now};
    ++total_issued_;
    if (now >= warmup()) {
        ++issued_;
    }
    double total = 0.0;
    std::vector<std::pair<int, double>> weights;
    for (std::size_t i = 0; i < pods_.size(); ++i) {
        const Pod& pod = pods_[i];
        if (pod.state != PodState::Ready) {
            continue;
        }
        double w = 1.0;
        if (p_.slow_start_ms > 0) {
            const double age = static_cast<double>(now - pod.ready) / static_cast<double>(p_.slow_start_ms * kUs);
            w = std::clamp(age, p_.slow_start_min_weight, 1.0);
        }
        weights.emplace_back(static_cast<int>(i), w);
        total += w;
    }
    if (weights.empty()) {
        finish_request(req, now, false);
        return;
    }
    double pick = routing_.uniform() * total;
    int chosen = weights.back().first;
    for (const auto& [i, w] : weights) {
        if (pick < w) {
            chosen = i;
            break;
        }
        pick -= w;
    }
    Pod& pod = pods_[static_cast<std::size_t>(chosen)];
    pod.queue.push_back(req);
    if (!pod.busy) {
        start_next(chosen, now);
    }
}

void Simulation::start_next(int idx, Micros now) {
    Pod& pod = pods_[static_cast<std::size_t>(idx)];
    const Micros timeout = p_.client_timeout_ms * kUs;
    while (!pod.queue.empty()) {
        Request req = pod.queue.front();
        pod.queue.pop_front();
        if (now >= req.arrival + timeout) {
            // The client already gave up; the server drops the request unprocessed.
            finish_request(req, now, false);
            continue;
        }
        const double factor = 1.0 + p_.service_jitter * service_.uniform(-1.0, 1.0);
        const auto service = std::max<Micros>(1, std::llround(p_.service_time_ms * factor * 1000.0));
        pod.busy = true;
        pod.serving = req;
        pod.busy_since = now;
        schedule(now + service, EventKind::ServiceDone, idx);
        return;
    }
    pod.busy = false;
    maybe_retire(idx);
}

void Simulation::finish_request(const Request& r, Micros now, bool served) {
    const Micros timeout = p_.client_timeout_ms * kUs;
    const bool ok = served && now - r.arrival <= timeout;
    const double latency = ok ? static_cast<double>(now - r.arrival) / 1000.0 : static_cast<double>(p_.client_timeout_ms);
    const bool profile = r.arrival >= warmup();
    if (ok) {
        ++total_served_;
        served_ += profile ? 1 : 0;
    } else {
        ++total_errors_;
        errors_ += profile ? 1 : 0;
    }
    completions_.push_back({now, latency});
    if (profile) {
        profile_latencies_.push_back(latency);
    }
}

void Simulation::sample(int idx, Micros now) {
    Pod& pod = pods_[static_cast<std::size_t>(idx)];
    if (pod.state != PodState::Ready) {
        return;
    }
    const Micros busy_now = pod.busy_total + (pod.busy ? now - pod.busy_since : 0);
    const Micros span = now - pod.last_sample;
    const double elu =
        span > 0 ? std::clamp(static_cast<double>(busy_now - pod.busy_at_sample) / static_cast<double>(span), 0.0, 1.0)
                 : 0.0;
    pod.busy_at_sample = busy_now;
    pod.last_sample = now;
    pod.last_elu = elu;
    pod.last_cpu = std::clamp(p_.cpu_scale * elu + noise_.normal(0.0, p_.cpu_noise), 0.0, 1.0);
    utilization_.push_back(elu);

    if (pod.batch.empty()) {
        pod.batch_start = now - pod.batch_backdate;
        pod.batch_backdate = 0;
    }
    pod.batch.push_back({now / kUs, elu});
    std::vector<double> values;
    values.reserve(pod.batch.size());
    for (const auto& s : pod.batch) {
        values.push_back(s.value);
    }
    const TimeMs timeout = batch_timeout(values, cfg_.threshold, p_.short_batch_ms, p_.long_batch_ms);
    if (now - pod.batch_start >= timeout * kUs) {
        send_batch(pod, now);
    }
    schedule(now + 1000 * kUs, EventKind::Sample, idx);
}

void Simulation::send_batch(Pod& pod, Micros now) {
    if (pod.batch.empty()) {
        return;
    }
    SampleBatch b{pod.id, kApp, kMetric, std::move(pod.batch), now / kUs};
    pod.batch.clear();
    in_transit_.push_back(std::move(b));
    const TimeMs delay = network_.uniform_int(p_.network_delay_min_ms, p_.network_delay_max_ms);
    schedule(now + delay * kUs, EventKind::Deliver, static_cast<int>(in_transit_.size()) - 1);
}

void Simulation::deliver(int index, Micros now) {
    SampleBatch batch = std::move(in_transit_[static_cast<std::size_t>(index)]);
    const TimeMs now_ms = now / kUs;
    log_.batch(now_ms, batch);
    const IngestAck ack = pipeline_.ingest(batch, now_ms);
    if (ack.cycle_due) {
        run_cycle(now);
        return;
    }
    if (ack.stored && !cycle_timer_) {
        if (auto next = pipeline_.next_cycle_time()) {
            cycle_timer_ = *next * kUs;
            schedule(*cycle_timer_, EventKind::CycleTimer);
        }
    }
}

void Simulation::run_cycle(Micros now) {
    const TimeMs now_ms = now / kUs;
    log_.cycle(now_ms);
    const CycleResult result = pipeline_.process_cycle(now_ms);
    for (const auto& line : trace_lines(result)) {
        decisions_ << line << '\n';
    }
    if (sc_.scaler_kind != ScalerKind::Predictive) {
        return;
    }
    auto it = result.applications.find(kApp);
    if (it != result.applications.end()) {
        apply_target(it->second.target, now);
    }
}

void Simulation::poll(Micros now) {
    std::vector<double> values;
    for (const auto& pod : pods_) {
        if (pod.state == PodState::Ready) {
            values.push_back(sc_.scaler_kind == ScalerKind::ReactiveCpu ? pod.last_cpu : pod.last_elu);
        }
    }
    const int rec = reactive_step(values, cfg_.threshold, cfg_.min_instances, cfg_.max_instances);
    // Scale-down stabilisation: act on the highest recommendation in the window.
    recommendations_.emplace_back(now, rec);
    while (!recommendations_.empty() && recommendations_.front().first < now - p_.reactive_stabilization_ms * kUs) {
        recommendations_.pop_front();
    }
    int desired = rec;
    for (const auto& [t, r] : recommendations_) {
        desired = std::max(desired, r);
    }
    apply_target(desired, now);
    schedule(now + p_.reactive_poll_ms * kUs, EventKind::Poll);
}

void Simulation::apply_target(int desired, Micros now) {
    desired = std::clamp(desired, cfg_.min_instances, cfg_.max_instances);
    desired_ = desired;
    int active = active_count();
    while (active < desired) {
        create_pod(now, false);
        ++active;
    }
    // Cancel pods that have not started yet, newest first, then drain the newest ready pods.
    for (auto it = pods_.rbegin(); it != pods_.rend() && active > desired; ++it) {
        if (it->state == PodState::Starting) {
            it->state = PodState::Gone;
            --active;
        }
    }
    while (active > desired) {
        int newest = -1;
        for (std::size_t i = 0; i < pods_.size(); ++i) {
            const Pod& pod = pods_[i];
            if (pod.state == PodState::Ready && (newest < 0 || pod.ready >= pods_[static_cast<std::size_t>(newest)].ready)) {
                newest = static_cast<int>(i);
            }
        }
        if (newest < 0) {
            break;
        }
        begin_drain(newest, now);
        --active;
    }
}

void Simulation::begin_drain(int idx, Micros now) {
    Pod& pod = pods_[static_cast<std::size_t>(idx)];
    send_batch(pod, now);
    pod.state = PodState::Draining;
    const TimeMs now_ms = now / kUs;
    log_.terminate_instance(now_ms, kApp, pod.id);
    pipeline_.terminate_instance(kApp, pod.id, now_ms);
    maybe_retire(idx);
}

void Simulation::maybe_retire(int idx) {
    Pod& pod = pods_[static_cast<std::size_t>(idx)];
    if (pod.state == PodState::Draining && !pod.busy && pod.queue.empty()) {
        pod.state = PodState::Gone;
    }
}

void Simulation::trace_tick(Micros now) {
    TraceRow row;
    row.time = (now - warmup()) / kUs;
    row.target_rps = sc_.profile.rate_at(row.time);
    int ready = 0;
    int starting = 0;
    for (const auto& pod : pods_) {
        if (pod.state == PodState::Ready) {
            ++ready;
            row.raw_sum += pod.last_elu;
        } else if (pod.state == PodState::Starting) {
            ++starting;
        }
    }
    row.pod_count = ready;
    row.pending = starting;
    row.mean_metric = ready > 0 ? row.raw_sum / ready : 0.0;
    row.decision = desired_;

    const Micros window = p_.latency_window_ms * kUs;
    while (window_begin_ < completions_.size() && completions_[window_begin_].time <= now - window) {
        ++window_begin_;
    }
    std::vector<double> recent;
    for (std::size_t i = window_begin_; i < completions_.size(); ++i) {
        recent.push_back(completions_[i].latency_ms);
    }
    row.p50 = percentile(recent, 0.50);
    row.p90 = percentile(recent, 0.90);
    row.p99 = percentile(recent, 0.99);
    trace_.push_back(row);
}

SimulationResult Simulation::run() {
    log_.header(cfg_);
    decisions_ << trace_header() << '\n';

    const int initial = p_.initial_instances > 0 ? p_.initial_instances : cfg_.min_instances;
    for (int i = 0; i < initial; ++i) {
        create_pod(0, true);
    }
    desired_ = initial;

    if (auto first = next_arrival(0)) {
        schedule(*first, EventKind::Arrival);
    }
    if (sc_.scaler_kind != ScalerKind::Predictive) {
        const TimeMs phase = phases_.uniform_int(0, p_.reactive_poll_ms - 1);
        schedule(phase * kUs, EventKind::Poll);
    }
    for (TimeMs t = 0; t <= sc_.profile.end(); t += 1000) {
        schedule(warmup() + t * kUs, EventKind::TraceTick);
    }
    schedule(end_time(), EventKind::End);

    bool done = false;
    while (!events_.empty() && !done) {
        const Event ev = events_.top();
        events_.pop();
        const Micros now = ev.time;
        switch (ev.kind) {
        case EventKind::Arrival:
            route(now);
            if (auto next = next_arrival(now)) {
                schedule(*next, EventKind::Arrival);
            }
            break;
        case EventKind::ServiceDone: {
            Pod& pod = pods_[static_cast<std::size_t>(ev.index)];
            pod.busy_total += now - pod.busy_since;
            pod.busy = false;
            finish_request(pod.serving, now, true);
            start_next(ev.index, now);
            break;
        }
        case EventKind::Sample:
            sample(ev.index, now);
            break;
        case EventKind::Deliver:
            deliver(ev.index, now);
            break;
        case EventKind::CycleTimer:
            cycle_timer_.reset();
            if (pipeline_.cycle_due(now / kUs)) {
                run_cycle(now);
            }
            break;
        case EventKind::PodReady:
            make_ready(ev.index, now);
            break;
        case EventKind::Poll:
            poll(now);
            break;
        case EventKind::TraceTick:
            trace_tick(now);
            break;
        case EventKind::End:
            done = true;
            break;
        }
    }

    SimulationResult out;
    out.trace = std::move(trace_);
    out.batch_log = log_stream_.str();
    out.decisions_csv = decisions_.str();
    out.utilization_samples = std::move(utilization_);

    SimulationSummary& s = out.summary;
    s.issued = issued_;
    s.served = served_;
    s.errors = errors_;
    s.in_flight = issued_ - served_ - errors_;
    s.total_issued = total_issued_;
    s.total_served = total_served_;
    s.total_errors = total_errors_;
    s.total_in_flight = total_issued_ - total_served_ - total_errors_;
    const std::uint64_t done_requests = served_ + errors_;
    s.success_rate = done_requests > 0 ? static_cast<double>(served_) / static_cast<double>(done_requests) : 1.0;
    if (!profile_latencies_.empty()) {
        double sum = 0.0;
        for (double l : profile_latencies_) {
            sum += l;
        }
        s.avg_latency_ms = sum / static_cast<double>(profile_latencies_.size());
        s.median_latency_ms = percentile(profile_latencies_, 0.50);
        s.p90_latency_ms = percentile(profile_latencies_, 0.90);
        s.p99_latency_ms = percentile(profile_latencies_, 0.99);
    }
    std::size_t over = 0;
    for (const auto& row : out.trace) {
        over += row.mean_metric > cfg_.threshold + 0.1 ? 1 : 0;
        s.saturated = s.saturated || row.mean_metric >= 0.95;
        s.max_pods = std::max(s.max_pods, row.pod_count);
    }
    s.over_threshold_fraction =
        out.trace.empty() ? 0.0 : static_cast<double>(over) / static_cast<double>(out.trace.size());
    s.recovery_ticks = recovery_ticks(out.trace, cfg_.threshold + 0.05);
    s.final_pods = out.trace.empty() ? 0 : out.trace.back().pod_count;
    return out;
}

std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

SimulationResult simulate(const Scenario& scenario) {
    scenario.profile.validate();
    scenario.sim.validate();
    scenario.scaler.validate("scenario.scaler");
    Simulation sim(scenario);
    return sim.run();
}

std::string trace_csv(const std::vector<TraceRow>& rows) {
    std::string out = "time_ms,target_rps,mean_metric,raw_sum,pod_count,pending,decision,p50_ms,p90_ms,p99_ms\n";
    for (const auto& r : rows) {
        out += std::to_string(r.time) + "," + fixed(r.target_rps) + "," + fixed(r.mean_metric) + "," +
               fixed(r.raw_sum) + "," + std::to_string(r.pod_count) + "," + std::to_string(r.pending) + "," +
               std::to_string(r.decision) + "," + fixed(r.p50) + "," + fixed(r.p90) + "," + fixed(r.p99) + "\n";
    }
    return out;
}

json summary_json(const SimulationSummary& s) {
    return {
        {"success_rate", s.success_rate},
        {"avg_latency_ms", s.avg_latency_ms},
        {"median_latency_ms", s.median_latency_ms},
        {"p90_latency_ms", s.p90_latency_ms},
        {"p99_latency_ms", s.p99_latency_ms},
        {"errors", s.errors},
        {"requests", s.issued},
        {"served", s.served},
        {"in_flight", s.in_flight},
        {"over_threshold_fraction", s.over_threshold_fraction},
        {"saturated", s.saturated},
        {"recovery_ticks", s.recovery_ticks ? json(*s.recovery_ticks) : json(nullptr)},
        {"max_pods", s.max_pods},
        {"final_pods", s.final_pods},
    };
}

} // namespace prescale
