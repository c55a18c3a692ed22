#pragma once

#include <stdexcept>
#include <string>

namespace pddlkit {

/// Base for all toolkit errors that are not expressed as diagnostic or
/// feedback values. Parse failures, lint findings and solver outcomes are
/// data, not exceptions; these are for genuinely exceptional conditions.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad configuration: malformed run config, missing external binary,
/// unusable corpus path, variant invariant violations.
struct ConfigError : Error {
    using Error::Error;
};

/// Filesystem failures (unreadable input, unwritable output directory).
struct IoError : Error {
    using Error::Error;
};

/// Dataset integrity failure; message lists the offending tasks.
struct DatasetError : Error {
    using Error::Error;
};

/// Grounding exceeded the configured action cap.
struct CapacityError : Error {
    using Error::Error;
};

/// LLM transport exhausted its retries or failed fatally.
struct GatewayError : Error {
    using Error::Error;
};

/// The replay script has no (further) answer for a requested tag.
/// Transient transport failure (connection refused, 5xx, throttling); the
/// client retries these with backoff. Other gateway errors do not retry.
struct TransportError : GatewayError {
    using GatewayError::GatewayError;
};

struct ScriptGapError : GatewayError {
    using GatewayError::GatewayError;
};

/// Solver feedback with an inconsistent status/file combination reached
/// the refinement dispatcher.
struct UnknownErrorTypeError : Error {
    using Error::Error;
};

/// Malformed plan text handed to the plan parser.
struct PlanFormatError : Error {
    using Error::Error;
};

/// A plan step references an unknown action schema, wrong arity, or
/// objects absent from the problem it is validated against.
struct PlanBindingError : Error {
    using Error::Error;
};

/// The embedding retriever cannot serve (embedder failure); callers may
/// fall back to BM25.
struct RetrievalUnavailableError : Error {
    using Error::Error;
};

} // namespace pddlkit
