#include "trajbench/wire.hpp"

#include <json.hpp>

#include "trajbench/error.hpp"

namespace trajbench::wire {

using json = nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& what, std::optional<std::uint64_t> id = std::nullopt) {
  throw BridgeError(BridgeError::Kind::kMalformedResponse, what, id);
}

json parse_line(const std::string& line, std::optional<std::uint64_t> id) {
  try {
    auto j = json::parse(line);
    if (!j.is_object()) malformed("message is not a JSON object", id);
    return j;
  } catch (const json::parse_error& e) {
    malformed(std::string("invalid JSON: ") + e.what(), id);
  }
}

json vec_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

Vec2 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw std::invalid_argument("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json path_json(const Path& p) {
  json out = json::array();
  for (const auto& v : p) out.push_back(vec_json(v));
  return out;
}

Path path_from(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected an array of positions");
  Path p;
  p.reserve(j.size());
  for (const auto& v : j) p.push_back(vec_from(v));
  return p;
}

const json& field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
  return *it;
}

Forecast forecast_from(const json& a) {
  const auto kind = field(a, "kind").get<std::string>();
  if (kind == "points") return PointSequence{path_from(field(a, "points"))};
  if (kind == "samples") {
    SampleSet s;
    for (const auto& p : field(a, "samples")) s.samples.push_back(path_from(p));
    return s;
  }
  if (kind == "grid") {
    GridSequence g;
    for (const auto& gj : field(a, "grids")) {
      ProbabilityGrid pg;
      pg.origin = vec_from(field(gj, "origin"));
      pg.resolution = field(gj, "resolution").get<double>();
      pg.width = field(gj, "width").get<int>();
      pg.height = field(gj, "height").get<int>();
      pg.mass = field(gj, "cells").get<std::vector<double>>();
      g.grids.push_back(std::move(pg));
    }
    return g;
  }
  if (kind == "mixture") {
    GaussianMixtureSequence m;
    m.weights = field(a, "weights").get<std::vector<double>>();
    for (const auto& mode : field(a, "modes")) {
      std::vector<Gaussian2> seq;
      for (const auto& gj : mode) {
        Gaussian2 g;
        g.mean = vec_from(field(gj, "mean"));
        const auto cov = field(gj, "cov").get<std::vector<double>>();
        if (cov.size() != 4) throw std::invalid_argument("cov needs 4 entries");
        g.covariance << cov[0], cov[1], cov[2], cov[3];
        seq.push_back(g);
      }
      m.modes.push_back(std::move(seq));
    }
    return m;
  }
  throw std::invalid_argument("unknown representation '" + kind + "'");
}

json forecast_json(const Forecast& f) {
  json out;
  out["kind"] = std::string(representation_name(f));
  if (const auto* p = std::get_if<PointSequence>(&f)) {
    out["points"] = path_json(p->points);
  } else if (const auto* s = std::get_if<SampleSet>(&f)) {
    out["samples"] = json::array();
    for (const auto& path : s->samples) out["samples"].push_back(path_json(path));
  } else if (const auto* g = std::get_if<GridSequence>(&f)) {
    out["grids"] = json::array();
    for (const auto& pg : g->grids)
      out["grids"].push_back({{"origin", vec_json(pg.origin)},
                              {"resolution", pg.resolution},
                              {"width", pg.width},
                              {"height", pg.height},
                              {"cells", pg.mass}});
  } else if (const auto* m = std::get_if<GaussianMixtureSequence>(&f)) {
    out["weights"] = m->weights;
    out["modes"] = json::array();
    for (const auto& mode : m->modes) {
      json seq = json::array();
      for (const auto& g : mode) {
        const auto& c = g.covariance;
        seq.push_back({{"mean", vec_json(g.mean)}, {"cov", {c(0, 0), c(0, 1), c(1, 0), c(1, 1)}}});
      }
      out["modes"].push_back(std::move(seq));
    }
  }
  return out;
}

}  // namespace

std::string encode_hello() { return json{{"type", "hello"}, {"version", kProtocolVersion}}.dump(); }

Capabilities decode_hello_reply(const std::string& line) {
  const auto j = parse_line(line, std::nullopt);
  Capabilities caps;
  try {
    if (field(j, "type").get<std::string>() != "hello") malformed("expected a hello reply");
    caps.version = field(j, "version").get<int>();
    if (caps.version != kProtocolVersion)
      throw BridgeError(BridgeError::Kind::kVersionMismatch, "adapter speaks protocol version " +
                                                                 std::to_string(caps.version) + ", expected " +
                                                                 std::to_string(kProtocolVersion));
    const auto& c = field(j, "capabilities");
    caps.representations = field(c, "representations").get<std::vector<std::string>>();
    for (const auto& r : caps.representations)
      if (r != "points" && r != "samples" && r != "grid" && r != "mixture")
        malformed("unknown representation '" + r + "' in capabilities");
    caps.max_k = c.value("max_k", 1);
    if (caps.max_k < 1) malformed("max_k must be >= 1");
    caps.name = j.value("name", std::string());
  } catch (const json::exception& e) {
    malformed(std::string("bad hello reply: ") + e.what());
  } catch (const std::invalid_argument& e) {
    malformed(std::string("bad hello reply: ") + e.what());
  }
  return caps;
}

std::string encode_request(std::uint64_t request_id, const Scenario& scenario) {
  json s;
  s["dt"] = scenario.dt;
  s["T_p"] = scenario.prediction_frames;
  s["O_p"] = scenario.observation_frames();
  s["agents"] = json::array();
  for (const auto& a : scenario.agents)
    s["agents"].push_back({{"id", a.agent_id}, {"target", a.is_target}, {"observed", path_json(a.observed)}});
  if (const auto& env = scenario.environment) {
    if (!env->goals.empty()) s["goals"] = path_json(env->goals);
    if (env->grid && !env->grid_path.empty())
      s["grid"] = {{"path", env->grid_path}, {"resolution", env->resolution}, {"origin", vec_json(env->origin)}};
  }
  return json{{"type", "predict"}, {"version", kProtocolVersion}, {"request_id", request_id}, {"scenario", s}}.dump();
}

Prediction decode_response(const std::string& line, std::uint64_t expected_id, std::size_t horizon) {
  const auto j = parse_line(line, expected_id);
  Prediction out;
  try {
    const auto type = field(j, "type").get<std::string>();
    if (type == "error")
      malformed("adapter reported an error: " + j.value("message", std::string("(no message)")), expected_id);
    if (type != "prediction") malformed("unexpected message type '" + type + "'", expected_id);
    const auto id = field(j, "request_id").get<std::uint64_t>();
    if (id != expected_id)
      malformed("response for request " + std::to_string(id) + " while waiting for " + std::to_string(expected_id),
                expected_id);
    for (const auto& a : field(j, "agents")) {
      AgentForecast af;
      af.agent_id = field(a, "id").get<AgentId>();
      af.forecast = forecast_from(a);
      out.agents.push_back(std::move(af));
    }
    validate_prediction(out, horizon);
  } catch (const json::exception& e) {
    malformed(std::string("bad prediction: ") + e.what(), expected_id);
  } catch (const std::invalid_argument& e) {
    malformed(std::string("bad prediction: ") + e.what(), expected_id);
  } catch (const ValidationError& e) {
    malformed(std::string("prediction violates invariants: ") + e.what(), expected_id);
  }
  return out;
}

std::string encode_shutdown() { return json{{"type", "shutdown"}}.dump(); }

Request decode_request(const std::string& line) {
  Request r;
  try {
    const auto j = json::parse(line);
    if (field(j, "type").get<std::string>() != "predict") throw ParseError("expected a predict message");
    r.request_id = field(j, "request_id").get<std::uint64_t>();
    const auto& s = field(j, "scenario");
    r.dt = field(s, "dt").get<double>();
    r.prediction_frames = field(s, "T_p").get<int>();
    for (const auto& a : field(s, "agents")) r.agents.emplace_back(field(a, "id").get<AgentId>(), path_from(field(a, "observed")));
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad request: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("bad request: ") + e.what());
  }
  return r;
}

std::string encode_response(std::uint64_t request_id, const Prediction& prediction) {
  json agents = json::array();
  for (const auto& a : prediction.agents) {
    json aj = forecast_json(a.forecast);
    aj["id"] = a.agent_id;
    agents.push_back(std::move(aj));
  }
  return json{{"type", "prediction"}, {"request_id", request_id}, {"agents", std::move(agents)}}.dump();
}

}  // namespace trajbench::wire
