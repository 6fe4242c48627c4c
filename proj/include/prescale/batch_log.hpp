#pragma once

#include "prescale/config.hpp"
#include "prescale/pipeline.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace prescale {

/**
 * Line-delimited JSON record of everything a pipeline was fed.
 *
 *   {"type":"header","config":{...}}
 *   {"type":"register","time_ms":T,"application_id":A,"instance_id":I}
 *   {"type":"terminate","time_ms":T,"application_id":A,"instance_id":I}
 *   {"type":"batch","arrived_at":T,"sent_at":S,"instance_id":I,"application_id":A,
 *    "metric_id":M,"samples":[[ts,v],...]}
 *   {"type":"cycle","time_ms":T}
 *
 * A record without "type" that carries "samples" is read as a batch.
 */
struct LogEvent {
    enum class Kind { Header, Register, Terminate, Batch, Cycle };

    Kind kind = Kind::Batch;
    TimeMs time = 0; // arrival time for batches
    ApplicationId application;
    InstanceId instance;
    SampleBatch batch;
    std::optional<ScalerConfig> config;
    std::size_t line = 0;
};

class LogError : public std::runtime_error {
public:
    LogError(std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class BatchLogWriter {
public:
    explicit BatchLogWriter(std::ostream& out) : out_(out) {}

    void header(const ScalerConfig& config);
    void register_instance(TimeMs time, const ApplicationId& app, const InstanceId& id);
    void terminate_instance(TimeMs time, const ApplicationId& app, const InstanceId& id);
    void batch(TimeMs arrived_at, const SampleBatch& batch);
    void cycle(TimeMs time);

private:
    std::ostream& out_;
};

/// Throws LogError with the 1-based line number of the first bad record.
std::vector<LogEvent> read_batch_log(std::istream& in);

struct ReplayStats {
    std::size_t cycles = 0;
    std::size_t batches = 0;
    std::vector<std::string> warnings;
};

/**
 * Feeds the events to a fresh pipeline and writes the decision trace to `out`.
 * Cycle records are honoured when present; a log without any falls back to
 * running a cycle whenever the processing cooldown allows.
 */
ReplayStats replay(const std::vector<LogEvent>& events, const ScalerConfig& config, std::ostream& out);

} // namespace prescale
