#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace trajbench {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input record. `line()` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A value violates a documented invariant (bounds, normalization, SPD).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Failure in one pipeline stage, tagged with the stage name for diagnostics.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Failure talking to an external predictor process.
class BridgeError : public Error {
 public:
  enum class Kind { kSpawn, kHandshakeTimeout, kVersionMismatch, kTimeout, kMalformedResponse, kProcessExit, kIo };

  BridgeError(Kind kind, const std::string& what, std::optional<std::uint64_t> request_id = std::nullopt);

  Kind kind() const noexcept { return kind_; }
  std::optional<std::uint64_t> request_id() const noexcept { return request_id_; }

 private:
  Kind kind_;
  std::optional<std::uint64_t> request_id_;
};

std::string_view to_string(BridgeError::Kind kind);

}  // namespace trajbench
