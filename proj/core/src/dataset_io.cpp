#include "trajbench/dataset_io.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <json.hpp>
#include <sstream>

#include "log.hpp"
#include "text_util.hpp"
#include "trajbench/error.hpp"
#include "trajbench/report.hpp"

namespace trajbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kNativeHeader = "frame,time,agent_id,x,y";

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Detections before frame/time completion. Either field may be missing.
struct RawDetection {
  std::optional<Frame> frame;
  std::optional<double> time;
  AgentId agent = 0;
  Vec2 position;
  std::size_t line = 0;
};

struct RawDataset {
  std::string name;
  std::optional<double> frequency;
  std::vector<RawDetection> detections;
  std::vector<Vec2> goals;
  std::optional<fs::path> map_path;
  std::optional<double> map_resolution;
  std::optional<Vec2> map_origin;
};

Dataset finish(RawDataset raw, const fs::path& source) {
  if (raw.detections.empty()) throw ParseError("empty dataset");
  bool all_time = true;
  for (const auto& d : raw.detections) {
    if (!d.frame && !d.time) throw ParseError("record has neither frame nor time", d.line);
    all_time &= d.time.has_value();
  }
  if (!all_time && !raw.frequency)
    throw ParseError("frame-indexed records need a declared frequency (scene fps or meta frequency_hz)");

  bool time_only = true;
  std::vector<Detection> dets;
  dets.reserve(raw.detections.size());
  Frame synthetic_frame = 0;
  for (const auto& r : raw.detections) {
    Detection d;
    d.agent_id = r.agent;
    d.position = r.position;
    if (r.frame) time_only = false;
    d.time = r.time ? *r.time : static_cast<double>(*r.frame) / *raw.frequency;
    // Placeholder frames for time-only input are unique; real ones are assigned below.
    d.frame = r.frame ? *r.frame : synthetic_frame++;
    dets.push_back(d);
  }
  if (raw.name.empty()) raw.name = source.stem().string();
  Dataset ds = assemble_dataset(std::move(dets), raw.frequency.value_or(0.0), raw.name);
  if (time_only) assign_frames_from_time(ds);

  if (!raw.goals.empty() || raw.map_path) {
    EnvironmentModel env;
    if (raw.map_path) {
      const fs::path p = raw.map_path->is_relative() ? source.parent_path() / *raw.map_path : *raw.map_path;
      env = load_environment(p, raw.map_resolution, raw.map_origin);
    }
    env.goals.insert(env.goals.end(), raw.goals.begin(), raw.goals.end());
    env.validate();
    ds.environment = std::make_shared<const EnvironmentModel>(std::move(env));
  }
  ds.validate();
  return ds;
}

Vec2 parse_point(std::string_view text, std::size_t line) {
  const auto parts = detail::split_ws(text);
  if (parts.size() != 2) throw ParseError("expected two coordinates", line);
  const auto x = detail::parse_double(parts[0]);
  const auto y = detail::parse_double(parts[1]);
  if (!x || !y) throw ParseError("malformed coordinates '" + std::string(text) + "'", line);
  Vec2 p(*x, *y);
  if (!p.allFinite()) throw ParseError("non-finite coordinates", line);
  return p;
}

RawDataset parse_native(const std::string& text) {
  RawDataset raw;
  std::istringstream in(text);
  std::string line_buf;
  std::size_t line = 0;
  while (std::getline(in, line_buf)) {
    ++line;
    const auto l = detail::trim(line_buf);
    if (l.empty()) continue;
    if (l.front() == '#') {
      const auto body = detail::trim(l.substr(1));
      const auto colon = body.find(':');
      if (colon == std::string_view::npos) continue;
      const auto key = detail::trim(body.substr(0, colon));
      const auto value = detail::trim(body.substr(colon + 1));
      if (key == "name") {
        raw.name = std::string(value);
      } else if (key == "frequency_hz") {
        const auto f = detail::parse_double(value);
        if (!f || !(*f > 0.0) || !std::isfinite(*f)) throw ParseError("invalid frequency_hz", line);
        raw.frequency = f;
      } else if (key == "goal") {
        raw.goals.push_back(parse_point(value, line));
      } else if (key == "map") {
        raw.map_path = fs::path(std::string(value));
      } else if (key == "map_resolution") {
        raw.map_resolution = detail::parse_double(value);
      } else if (key == "map_origin") {
        raw.map_origin = parse_point(value, line);
      } else if (key != "format") {
        detail::warn_once("native-meta-" + std::string(key),
                          "ignoring unknown metadata key '" + std::string(key) + "'");
      }
      continue;
    }
    if (l.starts_with("frame")) continue;  // column header
    const auto fields = detail::split(l, ',');
    if (fields.size() < 5) throw ParseError("expected 5 fields (frame,time,agent_id,x,y), got " +
                                            std::to_string(fields.size()), line);
    if (fields.size() > 5) detail::warn_once("native-extra-fields", "ignoring extra fields in native records");
    RawDetection d;
    d.line = line;
    if (!detail::trim(fields[0]).empty()) {
      const auto f = detail::parse_int(fields[0]);
      if (!f) throw ParseError("malformed frame '" + std::string(fields[0]) + "'", line);
      d.frame = *f;
    }
    if (!detail::trim(fields[1]).empty()) {
      const auto t = detail::parse_double(fields[1]);
      if (!t) throw ParseError("malformed time '" + std::string(fields[1]) + "'", line);
      if (!std::isfinite(*t) || *t < 0.0) throw ParseError("time must be finite and non-negative", line);
      d.time = *t;
    }
    const auto id = detail::parse_int(fields[2]);
    const auto x = detail::parse_double(fields[3]);
    const auto y = detail::parse_double(fields[4]);
    if (!id || !x || !y) throw ParseError("malformed record '" + std::string(l) + "'", line);
    d.agent = *id;
    d.position = Vec2(*x, *y);
    if (!d.position.allFinite()) throw ParseError("non-finite coordinates", line);
    raw.detections.push_back(d);
  }
  return raw;
}

double json_number(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) throw ParseError(std::string("missing numeric field '") + key + "'", line);
  return it->get<double>();
}

RawDataset parse_trajnet(const std::string& text) {
  RawDataset raw;
  std::istringstream in(text);
  std::string line_buf;
  std::size_t line = 0;
  while (std::getline(in, line_buf)) {
    ++line;
    const auto l = detail::trim(line_buf);
    if (l.empty()) continue;
    json rec;
    try {
      rec = json::parse(l);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid json: ") + e.what(), line);
    }
    if (!rec.is_object() || rec.size() != 1) throw ParseError("record must be an object with one key", line);
    const auto& [kind, body] = *rec.items().begin();
    if (!body.is_object()) throw ParseError("record body must be an object", line);
    if (kind == "track") {
      RawDetection d;
      d.line = line;
      for (const auto& [k, v] : body.items()) {
        if (k != "f" && k != "p" && k != "x" && k != "y" && k != "t")
          detail::warn_once("trajnet-track-" + k, "ignoring unknown track field '" + k + "'");
      }
      if (!body.contains("p") || !body["p"].is_number_integer()) throw ParseError("track record needs integer 'p'", line);
      d.agent = body["p"].get<AgentId>();
      if (body.contains("f")) {
        if (!body["f"].is_number_integer()) throw ParseError("track field 'f' must be an integer", line);
        d.frame = body["f"].get<Frame>();
      }
      if (body.contains("t")) {
        const double t = json_number(body, "t", line);
        if (t < 0.0) throw ParseError("time must be non-negative", line);
        d.time = t;
      }
      d.position = Vec2(json_number(body, "x", line), json_number(body, "y", line));
      if (!d.position.allFinite()) throw ParseError("non-finite coordinates", line);
      raw.detections.push_back(d);
    } else if (kind == "scene") {
      if (body.contains("fps") && body["fps"].is_number()) {
        const double fps = body["fps"].get<double>();
        if (!(fps > 0.0)) throw ParseError("scene fps must be positive", line);
        if (raw.frequency && *raw.frequency != fps) throw ParseError("conflicting scene fps values", line);
        raw.frequency = fps;
      }
    } else if (kind == "meta") {
      if (body.contains("name")) raw.name = body["name"].get<std::string>();
      if (body.contains("frequency_hz")) {
        const double f = json_number(body, "frequency_hz", line);
        if (!(f > 0.0)) throw ParseError("frequency_hz must be positive", line);
        raw.frequency = f;
      }
    } else if (kind == "goal") {
      Vec2 g(json_number(body, "x", line), json_number(body, "y", line));
      raw.goals.push_back(g);
    } else if (kind == "map") {
      if (!body.contains("path") || !body["path"].is_string()) throw ParseError("map record needs 'path'", line);
      raw.map_path = fs::path(body["path"].get<std::string>());
      if (body.contains("resolution")) raw.map_resolution = json_number(body, "resolution", line);
      if (body.contains("origin")) {
        const auto& o = body["origin"];
        if (!o.is_array() || o.size() != 2) throw ParseError("map origin must be [x, y]", line);
        raw.map_origin = Vec2(o[0].get<double>(), o[1].get<double>());
      }
    } else {
      detail::warn_once("trajnet-record-" + kind, "ignoring unknown record type '" + kind + "'");
    }
  }
  return raw;
}

// Grid files ------------------------------------------------------------------

struct GridData {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> cells;  // row 0 = iy 0
};

GridData parse_pgm(const std::string& bytes) {
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const auto b = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(b, pos - b);
  };
  const auto magic = next_token();
  const auto w = detail::parse_int(next_token());
  const auto h = detail::parse_int(next_token());
  const auto maxval = detail::parse_int(next_token());
  if (!w || !h || !maxval || *w < 1 || *h < 1) throw ParseError("malformed PGM header");
  if (*maxval != 255) throw ParseError("only 8-bit PGM images are supported");
  GridData g{static_cast<int>(*w), static_cast<int>(*h), {}};
  const auto n = static_cast<std::size_t>(g.width) * g.height;
  std::vector<std::uint8_t> image;
  image.reserve(n);
  if (magic == "P5") {
    ++pos;  // single whitespace after maxval
    if (bytes.size() - pos != n) throw ParseError("dimension mismatch: PGM payload has " +
                                                  std::to_string(bytes.size() - pos) + " bytes, expected " +
                                                  std::to_string(n));
    image.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  } else if (magic == "P2") {
    for (std::string tok = next_token(); !tok.empty(); tok = next_token()) {
      const auto v = detail::parse_int(tok);
      if (!v || *v < 0 || *v > 255) throw ParseError("invalid PGM value '" + tok + "'");
      image.push_back(static_cast<std::uint8_t>(*v));
    }
    if (image.size() != n) throw ParseError("dimension mismatch: PGM has " + std::to_string(image.size()) +
                                            " values, expected " + std::to_string(n));
  } else {
    throw ParseError("unsupported image type '" + magic + "'");
  }
  // Image rows run top (highest y) to bottom.
  g.cells.resize(n);
  for (int r = 0; r < g.height; ++r)
    std::copy_n(image.begin() + static_cast<std::ptrdiff_t>(r) * g.width, g.width,
                g.cells.begin() + static_cast<std::ptrdiff_t>(g.height - 1 - r) * g.width);
  return g;
}

GridData parse_text_grid(const std::string& text) {
  GridData g;
  std::istringstream in(text);
  std::string line_buf;
  std::size_t line = 0;
  while (std::getline(in, line_buf)) {
    ++line;
    auto l = detail::trim(line_buf);
    if (l.empty() || l.front() == '#') continue;
    const auto tokens = detail::split_ws(l);
    if (g.width == 0) g.width = static_cast<int>(tokens.size());
    if (static_cast<int>(tokens.size()) != g.width)
      throw ParseError("dimension mismatch: row has " + std::to_string(tokens.size()) + " cells, expected " +
                       std::to_string(g.width), line);
    for (auto t : tokens) {
      const auto v = detail::parse_int(t);
      if (!v || *v < 0 || *v > 255) throw ParseError("cell value must be an integer in [0, 255]", line);
      g.cells.push_back(static_cast<std::uint8_t>(*v));
    }
    ++g.height;
  }
  if (g.height == 0) throw ParseError("empty grid");
  return g;
}

fs::path sidecar_path(const fs::path& grid_path) {
  auto p = grid_path;
  return p.replace_extension(".yaml");
}

}  // namespace

DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "trajnet_json" || name == "trajnet") return DatasetFormat::kTrajnetJson;
  if (name == "native") return DatasetFormat::kNative;
  throw ConfigError("unknown dataset format '" + std::string(name) + "'");
}

std::string_view to_string(DatasetFormat format) {
  return format == DatasetFormat::kNative ? "native" : "trajnet_json";
}

Dataset load_dataset(const fs::path& path, DatasetFormat format) {
  const auto text = read_file(path);
  auto raw = format == DatasetFormat::kNative ? parse_native(text) : parse_trajnet(text);
  return finish(std::move(raw), path);
}

void write_dataset(const Dataset& dataset, const fs::path& path, DatasetFormat format) {
  dataset.validate();
  std::optional<fs::path> grid_file;
  if (dataset.environment && dataset.environment->grid) {
    grid_file = path.parent_path() / (path.stem().string() + ".grid.txt");
    write_environment(*dataset.environment, *grid_file);
  }
  std::vector<const Detection*> all;
  for (const auto& t : dataset.tracks)
    for (const auto& d : t.detections) all.push_back(&d);
  std::stable_sort(all.begin(), all.end(), [](const Detection* a, const Detection* b) {
    return a->frame != b->frame ? a->frame < b->frame : a->agent_id < b->agent_id;
  });

  std::ostringstream out;
  const auto& fmt = format_double;
  if (format == DatasetFormat::kNative) {
    out << "# format: trajbench-native-1\n";
    out << "# name: " << dataset.name << "\n";
    out << "# frequency_hz: " << fmt(dataset.frequency_hz) << "\n";
    if (dataset.environment) {
      for (const auto& g : dataset.environment->goals) out << "# goal: " << fmt(g.x()) << " " << fmt(g.y()) << "\n";
      if (grid_file) out << "# map: " << grid_file->filename().string() << "\n";
    }
    out << kNativeHeader << "\n";
    for (const auto* d : all)
      out << d->frame << "," << fmt(d->time) << "," << d->agent_id << "," << fmt(d->position.x()) << ","
          << fmt(d->position.y()) << "\n";
  } else {
    json meta = {{"meta", {{"name", dataset.name}, {"frequency_hz", dataset.frequency_hz}}}};
    out << meta.dump() << "\n";
    if (dataset.environment) {
      for (const auto& g : dataset.environment->goals) out << json{{"goal", {{"x", g.x()}, {"y", g.y()}}}}.dump() << "\n";
      if (grid_file) out << json{{"map", {{"path", grid_file->filename().string()}}}}.dump() << "\n";
    }
    for (const auto* d : all)
      out << json{{"track", {{"f", d->frame}, {"p", d->agent_id}, {"x", d->position.x()}, {"y", d->position.y()},
                             {"t", d->time}}}}
                 .dump()
          << "\n";
  }
  write_text_file(path, out.str());
}

EnvironmentModel load_environment(const fs::path& path, std::optional<double> resolution, std::optional<Vec2> origin) {
  const auto bytes = read_file(path);
  GridData g = (bytes.starts_with("P5") || bytes.starts_with("P2")) ? parse_pgm(bytes) : parse_text_grid(bytes);

  EnvironmentModel env;
  env.grid_path = path.string();
  std::vector<int> semantic_labels;
  const auto sidecar = sidecar_path(path);
  if (fs::exists(sidecar)) {
    YAML::Node meta;
    try {
      meta = YAML::LoadFile(sidecar.string());
    } catch (const YAML::Exception& e) {
      throw ParseError("sidecar " + sidecar.string() + ": " + e.what());
    }
    for (const auto& kv : meta) {
      const auto key = kv.first.as<std::string>();
      const auto& v = kv.second;
      try {
        if (key == "resolution") {
          if (!resolution) resolution = v.as<double>();
        } else if (key == "origin") {
          if (!origin) origin = Vec2(v[0].as<double>(), v[1].as<double>());
        } else if (key == "semantic_labels") {
          semantic_labels = v.as<std::vector<int>>();
        } else if (key == "goals") {
          for (const auto& gnode : v) env.goals.emplace_back(gnode[0].as<double>(), gnode[1].as<double>());
        } else if (key == "width" || key == "height") {
          const int expected = v.as<int>();
          const int actual = key == "width" ? g.width : g.height;
          if (expected != actual)
            throw ParseError("dimension mismatch: sidecar " + key + " " + std::to_string(expected) + ", grid has " +
                             std::to_string(actual));
        } else {
          detail::warn_once("sidecar-" + key, "ignoring unknown sidecar key '" + key + "'");
        }
      } catch (const YAML::Exception& e) {
        throw ParseError("sidecar key '" + key + "': " + e.what());
      }
    }
  }
  if (!resolution) throw ParseError("grid " + path.string() + " has no resolution (argument or sidecar)");
  if (!(*resolution > 0.0)) throw ValidationError("grid resolution must be > 0");
  for (auto v : g.cells) {
    if (v == 0 || v == 255) continue;
    if (std::find(semantic_labels.begin(), semantic_labels.end(), v) == semantic_labels.end())
      throw ParseError("unknown semantic label " + std::to_string(v) + " in " + path.string());
  }
  env.resolution = *resolution;
  env.origin = origin.value_or(Vec2::Zero());
  env.grid = EnvironmentModel::Grid{g.width, g.height, std::move(g.cells)};
  env.validate();
  return env;
}

std::vector<Vec2> load_goals(const fs::path& path) {
  const auto text = read_file(path);
  std::vector<Vec2> goals;
  std::istringstream in(text);
  std::string line_buf;
  std::size_t line = 0;
  while (std::getline(in, line_buf)) {
    ++line;
    auto l = detail::trim(line_buf);
    if (const auto hash = l.find('#'); hash != std::string_view::npos) l = detail::trim(l.substr(0, hash));
    if (l.empty()) continue;
    goals.push_back(parse_point(l, line));
  }
  return goals;
}

void write_environment(const EnvironmentModel& env, const fs::path& grid_path) {
  env.validate();
  if (!env.grid) throw ValidationError("environment has no grid to write");
  std::ostringstream grid;
  std::set<int> labels;
  for (int iy = 0; iy < env.grid->height; ++iy) {
    for (int ix = 0; ix < env.grid->width; ++ix) {
      const int v = env.grid->at(ix, iy);
      if (v != 0 && v != 255) labels.insert(v);
      grid << (ix ? " " : "") << v;
    }
    grid << "\n";
  }
  write_text_file(grid_path, grid.str());

  YAML::Emitter meta;
  meta.SetDoublePrecision(17);
  meta << YAML::BeginMap;
  meta << YAML::Key << "resolution" << YAML::Value << env.resolution;
  meta << YAML::Key << "origin" << YAML::Value << YAML::Flow << YAML::BeginSeq << env.origin.x() << env.origin.y()
       << YAML::EndSeq;
  meta << YAML::Key << "width" << YAML::Value << env.grid->width;
  meta << YAML::Key << "height" << YAML::Value << env.grid->height;
  if (!labels.empty()) {
    meta << YAML::Key << "semantic_labels" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (int l : labels) meta << l;
    meta << YAML::EndSeq;
  }
  meta << YAML::EndMap;
  write_text_file(sidecar_path(grid_path), std::string(meta.c_str()) + "\n");
}

}  // namespace trajbench
