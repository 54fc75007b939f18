#pragma once

#include <filesystem>
#include <string_view>

#include "trajbench/dataset.hpp"

namespace trajbench {

enum class DatasetFormat {
  kTrajnetJson,  ///< newline-delimited json records ("track", "scene", "goal", "map", "meta")
  kNative,       ///< csv: frame,time,agent_id,x,y with "# key: value" metadata lines
};

DatasetFormat parse_dataset_format(std::string_view name);
std::string_view to_string(DatasetFormat format);

/// Loads a detection stream. Relative map paths inside the file resolve
/// against the file's directory.
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);

/// Writes `dataset` so that load_dataset(path, format) reproduces it.
/// A grid, if any, is written next to `path` as "<stem>.grid.txt" + sidecar.
void write_dataset(const Dataset& dataset, const std::filesystem::path& path, DatasetFormat format);

/// Loads a grid map. Text matrices (whitespace separated 0..255) and binary or
/// ascii PGM images are accepted. If a sidecar "<stem>.yaml" exists its
/// `semantic_labels`, `goals`, and (when the arguments are not given) its
/// `resolution`/`origin` are applied.
EnvironmentModel load_environment(const std::filesystem::path& path,
                                  std::optional<double> resolution = std::nullopt,
                                  std::optional<Vec2> origin = std::nullopt);

/// One goal per line, "x y" (commas also accepted). '#' starts a comment.
std::vector<Vec2> load_goals(const std::filesystem::path& path);

void write_environment(const EnvironmentModel& env, const std::filesystem::path& grid_path);

}  // namespace trajbench
