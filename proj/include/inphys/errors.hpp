#pragma once

#include <stdexcept>
#include <string>

namespace inphys {

// Shape or dimension mismatch in matrix / graph plumbing.
struct shape_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Invalid configuration value (negative penalty factor, unknown mode, ...).
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed input data (non-finite state, empty dataset, ...).
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numeric failure while running (diverged simulation or training loss).
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File and serialization problems: missing path, bad magic, truncation.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Artifacts that do not fit together (checkpoint vs. dataset layout).
struct artifact_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// API misuse: stale caches, out-of-order calls. A bug in the caller.
struct contract_error : std::logic_error {
    using std::logic_error::logic_error;
};

// Unsupported geometry combination in collision handling.
struct geometry_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scene sampling could not satisfy its constraints (crowded box, ...).
struct sampler_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace inphys
