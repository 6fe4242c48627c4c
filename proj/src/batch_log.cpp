#include "prescale/batch_log.hpp"

#include <istream>
#include <ostream>

namespace prescale {

using nlohmann::json;

LogError::LogError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

void BatchLogWriter::header(const ScalerConfig& config) {
    out_ << json{{"type", "header"}, {"config", to_json(config)}}.dump() << '\n';
}

void BatchLogWriter::register_instance(TimeMs time, const ApplicationId& app, const InstanceId& id) {
    out_ << json{{"type", "register"}, {"time_ms", time}, {"application_id", app}, {"instance_id", id}}.dump()
         << '\n';
}

void BatchLogWriter::terminate_instance(TimeMs time, const ApplicationId& app, const InstanceId& id) {
    out_ << json{{"type", "terminate"}, {"time_ms", time}, {"application_id", app}, {"instance_id", id}}.dump()
         << '\n';
}

void BatchLogWriter::batch(TimeMs arrived_at, const SampleBatch& b) {
    json samples = json::array();
    for (const auto& s : b.samples) {
        samples.push_back(json::array({s.timestamp, s.value}));
    }
    out_ << json{{"type", "batch"},
                 {"arrived_at", arrived_at},
                 {"sent_at", b.sent_at},
                 {"instance_id", b.instance_id},
                 {"application_id", b.application_id},
                 {"metric_id", b.metric_id},
                 {"samples", samples}}
                .dump()
         << '\n';
}

void BatchLogWriter::cycle(TimeMs time) {
    out_ << json{{"type", "cycle"}, {"time_ms", time}}.dump() << '\n';
}

namespace {

TimeMs int_field(const json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer()) {
        throw LogError(line, std::string("missing or non-integer '") + key + "'");
    }
    return it->get<TimeMs>();
}

std::string string_field(const json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
        throw LogError(line, std::string("missing or non-string '") + key + "'");
    }
    return it->get<std::string>();
}

LogEvent parse_batch(const json& j, std::size_t line) {
    LogEvent e;
    e.kind = LogEvent::Kind::Batch;
    e.line = line;
    e.batch.instance_id = string_field(j, "instance_id", line);
    e.batch.application_id = string_field(j, "application_id", line);
    e.batch.metric_id = string_field(j, "metric_id", line);
    e.batch.sent_at = j.contains("sent_at") ? int_field(j, "sent_at", line) : 0;
    e.time = j.contains("arrived_at") ? int_field(j, "arrived_at", line) : e.batch.sent_at;
    auto it = j.find("samples");
    if (it == j.end() || !it->is_array()) {
        throw LogError(line, "'samples' must be an array of [timestamp_ms, value] pairs");
    }
    for (const auto& s : *it) {
        if (!s.is_array() || s.size() != 2 || !s[0].is_number_integer() || !s[1].is_number()) {
            throw LogError(line, "malformed sample, expected [timestamp_ms, value]");
        }
        e.batch.samples.push_back({s[0].get<TimeMs>(), s[1].get<double>()});
    }
    e.application = e.batch.application_id;
    e.instance = e.batch.instance_id;
    return e;
}

} // namespace

std::vector<LogEvent> read_batch_log(std::istream& in) {
    std::vector<LogEvent> events;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw LogError(line, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object()) {
            throw LogError(line, "expected a JSON object");
        }
        const std::string type = j.contains("type") ? string_field(j, "type", line) : "";
        LogEvent e;
        e.line = line;
        if (type == "batch" || (type.empty() && j.contains("samples"))) {
            e = parse_batch(j, line);
        } else if (type == "header") {
            e.kind = LogEvent::Kind::Header;
            try {
                e.config = parse_scaler_config(j.at("config"));
            } catch (const std::exception& ex) {
                throw LogError(line, std::string("bad header config: ") + ex.what());
            }
        } else if (type == "register" || type == "terminate") {
            e.kind = type == "register" ? LogEvent::Kind::Register : LogEvent::Kind::Terminate;
            e.time = int_field(j, "time_ms", line);
            e.application = string_field(j, "application_id", line);
            e.instance = string_field(j, "instance_id", line);
        } else if (type == "cycle") {
            e.kind = LogEvent::Kind::Cycle;
            e.time = int_field(j, "time_ms", line);
        } else {
            throw LogError(line, "unknown record type '" + type + "'");
        }
        events.push_back(std::move(e));
    }
    return events;
}

ReplayStats replay(const std::vector<LogEvent>& events, const ScalerConfig& config, std::ostream& out) {
    Pipeline pipeline(config);
    ReplayStats stats;
    out << trace_header() << '\n';

    auto run_cycle = [&](TimeMs now) {
        for (const auto& line : trace_lines(pipeline.process_cycle(now))) {
            out << line << '\n';
        }
        ++stats.cycles;
    };

    bool explicit_cycles = false;
    for (const auto& e : events) {
        explicit_cycles = explicit_cycles || e.kind == LogEvent::Kind::Cycle;
    }

    auto flush_due = [&](TimeMs until) {
        if (explicit_cycles || !pipeline.has_pending()) {
            return;
        }
        const auto next = pipeline.next_cycle_time();
        if (next && *next <= until) {
            run_cycle(*next);
        }
    };

    TimeMs last_time = 0;
    for (const auto& e : events) {
        try {
            switch (e.kind) {
            case LogEvent::Kind::Header:
                break;
            case LogEvent::Kind::Register:
                flush_due(e.time);
                pipeline.register_instance(e.application, e.instance, e.time);
                break;
            case LogEvent::Kind::Terminate:
                flush_due(e.time);
                pipeline.terminate_instance(e.application, e.instance, e.time);
                break;
            case LogEvent::Kind::Batch: {
                flush_due(e.time);
                const IngestAck ack = pipeline.ingest(e.batch, e.time);
                ++stats.batches;
                if (!explicit_cycles && ack.cycle_due) {
                    run_cycle(e.time);
                }
                break;
            }
            case LogEvent::Kind::Cycle:
                run_cycle(e.time);
                break;
            }
        } catch (const InvalidInput& ex) {
            throw LogError(e.line, ex.what());
        }
        last_time = std::max(last_time, e.time);
    }
    if (!explicit_cycles && pipeline.has_pending()) {
        const auto next = pipeline.next_cycle_time();
        run_cycle(next ? std::max(*next, last_time) : last_time);
    }
    stats.warnings = pipeline.drain_warnings();
    return stats;
}

} // namespace prescale
