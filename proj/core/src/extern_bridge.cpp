#include "trajbench/extern_bridge.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

namespace trajbench {

BridgeError::BridgeError(Kind kind, const std::string& what, std::optional<std::uint64_t> request_id)
    : Error("external predictor: " + std::string(to_string(kind)) +
            (request_id ? " (request " + std::to_string(*request_id) + ")" : std::string()) + ": " + what),
      kind_(kind),
      request_id_(request_id) {}

std::string_view to_string(BridgeError::Kind kind) {
  switch (kind) {
    case BridgeError::Kind::kSpawn: return "spawn failed";
    case BridgeError::Kind::kHandshakeTimeout: return "handshake timeout";
    case BridgeError::Kind::kVersionMismatch: return "version mismatch";
    case BridgeError::Kind::kTimeout: return "request timeout";
    case BridgeError::Kind::kMalformedResponse: return "malformed response";
    case BridgeError::Kind::kProcessExit: return "process exited";
    case BridgeError::Kind::kIo: return "i/o error";
  }
  return "unknown";
}

std::vector<std::string> split_command_line(const std::string& command) {
  std::vector<std::string> args;
  std::string cur;
  bool in_arg = false;
  char quote = 0;
  for (std::size_t i = 0; i < command.size(); ++i) {
    const char c = command[i];
    if (quote == '\'') {
      if (c == '\'') quote = 0;
      else cur += c;
      continue;
    }
    if (c == '\\' && i + 1 < command.size()) {
      cur += command[++i];
      in_arg = true;
      continue;
    }
    if (quote == '"') {
      if (c == '"') quote = 0;
      else cur += c;
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
      in_arg = true;
    } else if (c == ' ' || c == '\t' || c == '\n') {
      if (in_arg) args.push_back(std::move(cur));
      cur.clear();
      in_arg = false;
    } else {
      cur += c;
      in_arg = true;
    }
  }
  if (quote != 0) throw ConfigError("unterminated quote in command: " + command);
  if (in_arg) args.push_back(std::move(cur));
  return args;
}

namespace {

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

}  // namespace

std::unique_ptr<ExternalSession> ExternalSession::spawn(const std::string& command,
                                                        std::chrono::milliseconds handshake_timeout) {
  const auto args = split_command_line(command);
  if (args.empty()) throw BridgeError(BridgeError::Kind::kSpawn, "empty command");
  ::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2];
  int out_pipe[2];
  int err_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw BridgeError(BridgeError::Kind::kSpawn, std::strerror(errno));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw BridgeError(BridgeError::Kind::kSpawn, std::strerror(errno));
  }
  if (::pipe2(err_pipe, O_CLOEXEC) != 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    throw BridgeError(BridgeError::Kind::kSpawn, std::strerror(errno));
  }

  std::vector<char*> argv;
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) ::close(fd);
    throw BridgeError(BridgeError::Kind::kSpawn, std::strerror(errno));
  }
  if (pid == 0) {
    ::signal(SIGPIPE, SIG_DFL);
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execvp(argv[0], argv.data());
    const int err = errno;
    [[maybe_unused]] auto n = ::write(err_pipe[1], &err, sizeof err);
    ::_exit(127);
  }

  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  int child_errno = 0;
  ssize_t got;
  do {
    got = ::read(err_pipe[0], &child_errno, sizeof child_errno);
  } while (got < 0 && errno == EINTR);
  ::close(err_pipe[0]);
  if (got > 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::waitpid(pid, nullptr, 0);
    throw BridgeError(BridgeError::Kind::kSpawn, "cannot execute '" + args[0] + "': " + std::strerror(child_errno));
  }

  std::unique_ptr<ExternalSession> s(new ExternalSession());
  s->pid_ = pid;
  s->to_child_ = in_pipe[1];
  s->from_child_ = out_pipe[0];

  s->write_line(wire::encode_hello(), std::nullopt);
  const auto reply = s->read_line(handshake_timeout, std::nullopt);
  if (!reply) {
    s->kill_child();
    throw BridgeError(BridgeError::Kind::kHandshakeTimeout,
                      "no hello reply within " + std::to_string(handshake_timeout.count()) + " ms");
  }
  try {
    s->capabilities_ = wire::decode_hello_reply(*reply);
  } catch (...) {
    s->kill_child();
    throw;
  }
  return s;
}

ExternalSession::~ExternalSession() {
  if (!exited_ && pid_ > 0) {
    try {
      shutdown(std::chrono::milliseconds(500));
    } catch (...) {
      kill_child();
    }
  }
  close_fd(to_child_);
  close_fd(from_child_);
}

void ExternalSession::write_line(const std::string& line, std::optional<std::uint64_t> request_id) {
  if (to_child_ < 0) throw BridgeError(BridgeError::Kind::kProcessExit, "session is closed", request_id);
  const std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(to_child_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EPIPE) throw BridgeError(BridgeError::Kind::kProcessExit, exit_description(), request_id);
      throw BridgeError(BridgeError::Kind::kIo, std::strerror(errno), request_id);
    }
    off += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> ExternalSession::read_line(std::chrono::milliseconds timeout,
                                                      std::optional<std::uint64_t> request_id) {
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + timeout;
  for (;;) {
    for (auto pos = buffer_.find('\n'); pos != std::string::npos; pos = buffer_.find('\n')) {
      std::string line = buffer_.substr(0, pos);
      buffer_.erase(0, pos + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) return line;
    }
    if (from_child_ < 0) throw BridgeError(BridgeError::Kind::kProcessExit, "session is closed", request_id);
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
    if (remaining.count() <= 0) return std::nullopt;
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw BridgeError(BridgeError::Kind::kIo, std::strerror(errno), request_id);
    }
    if (ready == 0) return std::nullopt;
    char chunk[65536];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw BridgeError(BridgeError::Kind::kIo, std::strerror(errno), request_id);
    }
    if (n == 0) {
      close_fd(from_child_);
      throw BridgeError(BridgeError::Kind::kProcessExit, exit_description(), request_id);
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void ExternalSession::kill_child() {
  if (pid_ > 0 && !exited_) {
    ::kill(pid_, SIGKILL);
    int status = 0;
    if (::waitpid(pid_, &status, 0) == pid_) {
      exited_ = true;
      exit_status_ = status;
    }
  }
  close_fd(to_child_);
  close_fd(from_child_);
}

std::string ExternalSession::exit_description() {
  if (!exited_ && pid_ > 0) {
    // The pipe closed; give the child a moment to be reaped.
    for (int i = 0; i < 100 && !exited_; ++i) {
      int status = 0;
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        exited_ = true;
        exit_status_ = status;
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }
  if (!exited_) return "output closed while the process is still running";
  if (WIFEXITED(exit_status_)) return "exited with status " + std::to_string(WEXITSTATUS(exit_status_));
  if (WIFSIGNALED(exit_status_)) return "killed by signal " + std::to_string(WTERMSIG(exit_status_));
  return "terminated";
}

Prediction ExternalSession::predict(const Scenario& scenario) {
  const std::uint64_t id = next_request_id_++;
  write_line(wire::encode_request(id, scenario), id);
  const auto line = read_line(request_timeout_, id);
  if (!line) {
    kill_child();
    throw BridgeError(BridgeError::Kind::kTimeout,
                      "no response within " + std::to_string(request_timeout_.count()) + " ms", id);
  }
  auto prediction = wire::decode_response(*line, id, static_cast<std::size_t>(scenario.prediction_frames));
  for (const auto& a : scenario.agents)
    if (a.is_target && prediction.find(a.agent_id) == nullptr)
      throw BridgeError(BridgeError::Kind::kMalformedResponse,
                        "no forecast for target agent " + std::to_string(a.agent_id), id);
  return prediction;
}

int ExternalSession::shutdown(std::chrono::milliseconds grace) {
  if (!exited_ && to_child_ >= 0) {
    try {
      write_line(wire::encode_shutdown(), std::nullopt);
    } catch (const BridgeError&) {
      // already gone
    }
  }
  close_fd(to_child_);
  const auto deadline = std::chrono::steady_clock::now() + grace;
  while (!exited_ && pid_ > 0) {
    int status = 0;
    const pid_t r = ::waitpid(pid_, &status, WNOHANG);
    if (r == pid_) {
      exited_ = true;
      exit_status_ = status;
      break;
    }
    if (r < 0 || std::chrono::steady_clock::now() >= deadline) {
      kill_child();
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  close_fd(from_child_);
  if (WIFEXITED(exit_status_)) return WEXITSTATUS(exit_status_);
  return -1;
}

ExternalPredictor::ExternalPredictor(std::string command, std::chrono::milliseconds request_timeout,
                                     std::chrono::milliseconds handshake_timeout)
    : command_(std::move(command)), session_(ExternalSession::spawn(command_, handshake_timeout)) {
  session_->set_request_timeout(request_timeout);
}

}  // namespace trajbench
