#include "mbe/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "mbe/errors.hpp"
#include "mbe/matrix_io.hpp"

namespace mbe {

namespace {

std::string tag_for(char c) {
  switch (c) {
    case '1': case '2': case '3': case '4': case '5': case '6': case '7':
      return std::string("s0") + c;
    case 'B': return "bourne";
    case 'W': return "wolf";
    case 'F': return "figures";
    case 'L': return "life";
    default:
      throw format_error(std::string("unknown character '") + c + "' in split shorthand");
  }
}

std::set<std::string> parse_segment(std::string_view seg) {
  if (seg.empty()) throw format_error("empty segment in split shorthand");
  std::set<std::string> tags;
  for (char c : seg) {
    std::string tag = tag_for(c);
    if (!tags.insert(std::move(tag)).second)
      throw format_error(std::string("duplicate character '") + c + "' in split segment");
  }
  return tags;
}

std::filesystem::path resolve(const RunManifest& m, const std::filesystem::path& p) {
  return p.is_absolute() ? p : m.base_dir / p;
}

}  // namespace

std::vector<std::string> RunManifest::model_names() const {
  std::set<std::string> names;
  for (const auto& run : runs)
    for (const auto& [name, path] : run.feature_sources) names.insert(name);
  return {names.begin(), names.end()};
}

std::set<std::string> parse_tag_segment(std::string_view s) { return parse_segment(s); }

DatasetSplit parse_split_shorthand(std::string_view s) {
  // Overlap between the segments is representable ("12345BW-BW" style splits
  // stack on data the base models saw); pipelines that need a clean holdout
  // reject it at the point of use.
  DatasetSplit split;
  const std::size_t dash = s.find('-');
  split.fit_tags = parse_segment(s.substr(0, dash));
  if (dash != std::string_view::npos) split.stack_tags = parse_segment(s.substr(dash + 1));
  return split;
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw format_error("manifest is not valid JSON: " + std::string(e.what()));
  }

  RunManifest m;
  m.base_dir = path.parent_path();
  try {
    m.tr_seconds = j.at("tr_seconds").get<double>();
    m.parcel_count = j.at("parcel_count").get<Index>();
    for (const auto& rj : j.at("runs")) {
      RunSpec run;
      run.run_id = rj.at("run_id").get<std::string>();
      for (const auto& t : rj.at("split_tags")) run.split_tags.insert(t.get<std::string>());
      if (rj.contains("features"))
        for (const auto& [name, p] : rj.at("features").items())
          run.feature_sources[name] = p.get<std::string>();
      run.bold_source = rj.at("bold").get<std::string>();
      m.runs.push_back(std::move(run));
    }
  } catch (const nlohmann::json::exception& e) {
    throw format_error("manifest missing required field: " + std::string(e.what()));
  }
  if (m.tr_seconds <= 0) throw data_error("manifest tr_seconds must be positive");
  if (m.parcel_count <= 0) throw data_error("manifest parcel_count must be positive");
  if (m.runs.empty()) throw data_error("manifest has no runs");

  std::set<std::string> ids;
  for (const auto& run : m.runs) {
    if (!ids.insert(run.run_id).second) throw data_error("duplicate run_id " + run.run_id);
    if (!std::filesystem::exists(resolve(m, run.bold_source)))
      throw data_error("missing bold file " + run.bold_source.string() + " for run " + run.run_id);
    for (const auto& [name, p] : run.feature_sources) {
      if (!std::filesystem::exists(resolve(m, p)))
        throw data_error("missing feature file " + p.string() + " for run " + run.run_id);
    }
  }
  return m;
}

void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
  nlohmann::json j;
  j["tr_seconds"] = m.tr_seconds;
  j["parcel_count"] = m.parcel_count;
  j["runs"] = nlohmann::json::array();
  for (const auto& run : m.runs) {
    nlohmann::json rj;
    rj["run_id"] = run.run_id;
    rj["split_tags"] = run.split_tags;
    rj["features"] = nlohmann::json::object();
    for (const auto& [name, p] : run.feature_sources) rj["features"][name] = p.string();
    rj["bold"] = run.bold_source.string();
    j["runs"].push_back(std::move(rj));
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

std::vector<const RunSpec*> select_runs(const RunManifest& m, const std::set<std::string>& tags) {
  std::vector<const RunSpec*> out;
  for (const auto& run : m.runs) {
    for (const auto& t : run.split_tags) {
      if (tags.count(t)) {
        out.push_back(&run);
        break;
      }
    }
  }
  return out;
}

TimeSeriesMatrix load_bold(const RunManifest& m, const std::vector<const RunSpec*>& runs) {
  if (runs.empty()) throw data_error("no runs selected");
  std::vector<TimeSeriesMatrix> parts;
  for (const RunSpec* run : runs) {
    const auto path = resolve(m, run->bold_source);
    TimeSeriesMatrix part = read_matrix(path, format_from_extension(path));
    if (part.cols() != m.parcel_count)
      throw dim_error("bold file for run " + run->run_id + " has " + std::to_string(part.cols()) +
                      " parcels, manifest declares " + std::to_string(m.parcel_count));
    part.tr_seconds = m.tr_seconds;
    parts.push_back(std::move(part));
  }
  return concat_runs(parts);
}

TimeSeriesMatrix load_features(const RunManifest& m, const std::vector<const RunSpec*>& runs,
                               const std::string& model_name) {
  if (runs.empty()) throw data_error("no runs selected");
  std::vector<TimeSeriesMatrix> parts;
  for (const RunSpec* run : runs) {
    const auto it = run->feature_sources.find(model_name);
    if (it == run->feature_sources.end())
      throw data_error("run " + run->run_id + " has no features for model '" + model_name + "'");
    const auto path = resolve(m, it->second);
    TimeSeriesMatrix part = read_matrix(path, format_from_extension(path));
    part.tr_seconds = m.tr_seconds;
    parts.push_back(std::move(part));
  }
  return concat_runs(parts);
}

}  // namespace mbe
