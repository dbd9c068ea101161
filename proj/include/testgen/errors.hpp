#pragma once

#include <stdexcept>
#include <string>

namespace testgen {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad caller input: unknown method names, mismatched projects, missing paths.
class InputError : public Error {
public:
  using Error::Error;
};

// Discovery found no source file the adapter recognizes.
class EmptyProjectError : public InputError {
public:
  using InputError::InputError;
};

// Bad configuration: malformed config file, invalid template, unknown adapter.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Source text could not be parsed (beyond tolerant recovery).
class ParseError : public Error {
public:
  using Error::Error;
};

// Retryable transport problem (timeout, connection reset, 5xx).
class TransportError : public Error {
public:
  using Error::Error;
};

// Retries exhausted; the enclosing unit's generation is aborted.
class BackendUnavailable : public Error {
public:
  using Error::Error;
};

// Replay transcript exhausted or does not match the issued request.
class ReplayDesync : public Error {
public:
  using Error::Error;
};

// Simulated toolchain queried outside its script (strict mode).
class ToolchainDesync : public Error {
public:
  using Error::Error;
};

// Toolchain binary missing, workspace not writable, and similar.
class EnvironmentError : public Error {
public:
  using Error::Error;
};

class ToolTimeout : public Error {
public:
  using Error::Error;
};

// Coverage instrumentation failed; hybrid falls back to full method level.
class CoverageUnavailable : public Error {
public:
  using Error::Error;
};

// Rate requested over an empty generated set.
class UndefinedRate : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace testgen
