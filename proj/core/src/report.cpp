#include "trajbench/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "trajbench/error.hpp"

namespace trajbench {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error("cannot format double");
  return {buf, ptr};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

Summary summarize_values(const std::vector<double>& values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(values.size()));
  return s;
}

std::vector<MetricCell> aggregate(const std::string& metric, const std::string& sweep,
                                  const std::vector<GroupedValue>& values) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> groups;
  for (const auto& v : values) {
    auto [it, inserted] = groups.try_emplace(v.group);
    if (inserted) order.push_back(v.group);
    it->second.push_back(v.value);
  }
  std::vector<MetricCell> cells;
  for (const auto& g : order) {
    const auto s = summarize_values(groups[g]);
    if (s.count == 0) continue;
    cells.push_back({metric, sweep, g, s.mean, s.std, s.count});
  }
  return cells;
}

const MetricCell* MetricReport::find(const std::string& metric, const std::string& group) const {
  for (const auto& c : cells)
    if (c.metric == metric && c.group == group) return &c;
  return nullptr;
}

void MetricReport::append(const MetricReport& other) {
  cells.insert(cells.end(), other.cells.begin(), other.cells.end());
  for (const auto& [k, v] : other.metadata) metadata.emplace(k, v);
}

std::string MetricReport::to_csv() const {
  std::ostringstream out;
  out << "metric,sweep,group,mean,std,count\n";
  for (const auto& c : cells)
    out << c.metric << "," << c.sweep << "," << c.group << "," << format_double(c.mean) << ","
        << format_double(c.std) << "," << c.count << "\n";
  return out.str();
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["schema_version"] = 1;
  doc["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : metadata) doc["metadata"][k] = v;
  doc["cells"] = nlohmann::ordered_json::array();
  for (const auto& c : cells)
    doc["cells"].push_back({{"metric", c.metric},
                            {"sweep", c.sweep},
                            {"group", c.group},
                            {"mean", c.mean},
                            {"std", c.std},
                            {"count", c.count}});
  return doc.dump(2) + "\n";
}

}  // namespace trajbench
