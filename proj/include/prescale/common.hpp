#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace prescale {

/// Milliseconds since the epoch of whatever clock drives the pipeline.
using TimeMs = std::int64_t;

using InstanceId = std::string;

/// Bad argument to a stage (non-finite value, count <= 0, missing record, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A parameter combination the algorithm cannot run with.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Alignment refused a batch; the aligner state is left untouched.
class RejectedBatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Imputation window whose ticks are not strictly increasing and uniformly spaced.
class InvalidWindow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace prescale
