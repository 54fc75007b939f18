#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace trajbench {

struct MetricCell {
  std::string metric;
  std::string sweep;  ///< swept variable, e.g. "T_s", "sigma", "crowd"; "none" for single runs
  std::string group;  ///< value of the swept variable
  double mean = 0.0;
  double std = 0.0;   ///< population standard deviation
  std::size_t count = 0;
};

struct MetricReport {
  std::vector<MetricCell> cells;
  std::map<std::string, std::string> metadata;

  const MetricCell* find(const std::string& metric, const std::string& group) const;
  void append(const MetricReport& other);

  std::string to_csv() const;
  std::string to_json() const;
};

struct Summary {
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

/// Population mean and standard deviation.
Summary summarize_values(const std::vector<double>& values);

/// One sample per scenario, tagged with the group it belongs to.
struct GroupedValue {
  std::string group;
  double value = 0.0;
};

/// Mean/std per group, groups emitted in first-seen order. Empty groups are skipped.
std::vector<MetricCell> aggregate(const std::string& metric, const std::string& sweep,
                                  const std::vector<GroupedValue>& values);

/// Shortest decimal representation that round-trips, locale independent.
std::string format_double(double value);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace trajbench
