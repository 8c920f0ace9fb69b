#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mbe/time_series.hpp"

namespace mbe {

// Single-file container for model serialization: a JSON index naming the
// entries plus arbitrary metadata, followed by the entries as ordinary
// binary matrix blobs.
//
// Layout: magic "MBEC", version u16 = 1, reserved u16 = 0, index length u64,
// index JSON bytes, payload. Index: {"entries": [{"name", "offset"}...],
// "meta": {...}} with offsets relative to the payload start.
struct Container {
  std::vector<std::pair<std::string, Eigen::MatrixXd>> entries;
  nlohmann::json meta;

  const Eigen::MatrixXd& at(const std::string& name) const;
  bool has(const std::string& name) const;
  void add(std::string name, Eigen::MatrixXd value);
};

void write_container(const Container& c, const std::filesystem::path& path);
Container read_container(const std::filesystem::path& path);

}  // namespace mbe
