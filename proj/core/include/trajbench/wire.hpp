#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trajbench/prediction.hpp"
#include "trajbench/scenario.hpp"

namespace trajbench::wire {

inline constexpr int kProtocolVersion = 1;

struct Capabilities {
  int version = 0;
  std::vector<std::string> representations;
  int max_k = 1;
  std::string name;
};

/// {"type":"hello","version":1}
std::string encode_hello();
Capabilities decode_hello_reply(const std::string& line);

/// {"type":"predict", "version":1, "request_id":..., "scenario":{...}}
std::string encode_request(std::uint64_t request_id, const Scenario& scenario);

/// Parses a "prediction" message. Throws BridgeError(kMalformedResponse) on
/// schema violations, id mismatch, or broken representation invariants.
Prediction decode_response(const std::string& line, std::uint64_t expected_id, std::size_t horizon);

std::string encode_shutdown();

/// Server-side helpers, used by adapters written in C++.
struct Request {
  std::uint64_t request_id = 0;
  double dt = 0.0;
  int prediction_frames = 0;
  std::vector<std::pair<AgentId, Path>> agents;
};
Request decode_request(const std::string& line);
std::string encode_response(std::uint64_t request_id, const Prediction& prediction);

}  // namespace trajbench::wire
