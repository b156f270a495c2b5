#pragma once

#include <stdexcept>
#include <string>

namespace itemnet {

// Base for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input: malformed pools, unknown item types, invalid parameters.
class InputError : public Error {
 public:
  using Error::Error;
};

// Tabular/JSON input does not match the expected schema.
class SchemaError : public InputError {
 public:
  using InputError::InputError;
};

// Filesystem problems.
class IoError : public Error {
 public:
  using Error::Error;
};

// Missing or rejected credentials, unusable provider configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Provider kept rate-limiting after the retry budget was exhausted.
class RateLimitError : public Error {
 public:
  using Error::Error;
};

// Provider answered with a payload we cannot interpret; carries the raw body.
class ProtocolError : public Error {
 public:
  ProtocolError(const std::string& msg, std::string body)
      : Error(msg), raw_body(std::move(body)) {}
  std::string raw_body;
};

// A socket would have been opened while offline mode is active.
class OfflineViolation : public Error {
 public:
  using Error::Error;
};

// Numerical estimation failed (e.g. glasso did not converge).
class EstimationError : public Error {
 public:
  EstimationError(const std::string& msg, int lambda_index = -1)
      : Error(msg), lambda_index(lambda_index) {}
  int lambda_index;
};

// An input column carries no variance; names the offending item.
class DegenerateInputError : public EstimationError {
 public:
  DegenerateInputError(const std::string& msg, std::string item_id)
      : EstimationError(msg), item_id(std::move(item_id)) {}
  std::string item_id;
};

// A model response contained no parsable item lines.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Item generation could not reach its target count.
class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace itemnet
