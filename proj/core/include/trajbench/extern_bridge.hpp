#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "trajbench/error.hpp"
#include "trajbench/predictors.hpp"
#include "trajbench/wire.hpp"

namespace trajbench {

/// Splits a command line into argv: whitespace separated, single and double
/// quotes group, backslash escapes the next character outside single quotes.
std::vector<std::string> split_command_line(const std::string& command);

/// A child process speaking the line protocol on its stdin/stdout. At most one
/// request is in flight. The child is killed when the session is destroyed.
class ExternalSession {
 public:
  ExternalSession(const ExternalSession&) = delete;
  ExternalSession& operator=(const ExternalSession&) = delete;
  ~ExternalSession();

  /// Launches `command` and performs the handshake.
  static std::unique_ptr<ExternalSession> spawn(const std::string& command,
                                                std::chrono::milliseconds handshake_timeout = std::chrono::seconds(10));

  const wire::Capabilities& capabilities() const noexcept { return capabilities_; }
  int pid() const noexcept { return pid_; }

  void set_request_timeout(std::chrono::milliseconds timeout) { request_timeout_ = timeout; }

  Prediction predict(const Scenario& scenario);

  /// Sends the shutdown message and waits for the child; returns its exit code.
  int shutdown(std::chrono::milliseconds grace = std::chrono::seconds(2));

 private:
  ExternalSession() = default;

  void write_line(const std::string& line, std::optional<std::uint64_t> request_id);
  /// Returns nullopt on timeout; throws on EOF.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout, std::optional<std::uint64_t> request_id);
  void kill_child();
  std::string exit_description();

  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  bool exited_ = false;
  int exit_status_ = 0;
  std::string buffer_;
  std::uint64_t next_request_id_ = 1;
  std::chrono::milliseconds request_timeout_ = std::chrono::seconds(10);
  wire::Capabilities capabilities_;
};

class ExternalPredictor final : public Predictor {
 public:
  ExternalPredictor(std::string command, std::chrono::milliseconds request_timeout = std::chrono::seconds(10),
                    std::chrono::milliseconds handshake_timeout = std::chrono::seconds(10));

  std::string id() const override { return "external:" + command_; }
  Prediction predict(const Scenario& scenario) override { return session_->predict(scenario); }
  ExternalSession& session() { return *session_; }

 private:
  std::string command_;
  std::unique_ptr<ExternalSession> session_;
};

}  // namespace trajbench
