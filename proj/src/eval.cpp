#include "mbe/eval.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "mbe/errors.hpp"

namespace mbe {

ScoreReport pearson_per_parcel(const TimeSeriesMatrix& pred, const TimeSeriesMatrix& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
    throw dim_error("prediction is " + std::to_string(pred.rows()) + "x" + std::to_string(pred.cols()) +
                    ", truth is " + std::to_string(truth.rows()) + "x" + std::to_string(truth.cols()));
  const Index t = pred.rows();
  const Index p = pred.cols();
  if (t < 3) throw data_error("need at least 3 rows to correlate");

  ScoreReport report;
  report.per_parcel_r.resize(p);
  const Eigen::RowVectorXd pm = pred.data.colwise().mean();
  const Eigen::RowVectorXd tm = truth.data.colwise().mean();
  for (Index j = 0; j < p; ++j) {
    const Eigen::VectorXd a = pred.data.col(j).array() - pm(j);
    const Eigen::VectorXd b = truth.data.col(j).array() - tm(j);
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) {
      report.per_parcel_r(j) = 0.0;
      report.degenerate_parcels.push_back(j);
    } else {
      report.per_parcel_r(j) = a.dot(b) / (na * nb);
    }
  }
  report.mean_r = report.per_parcel_r.mean();
  return report;
}

double aggregate_subjects(const std::vector<ScoreReport>& reports) {
  if (reports.empty()) throw data_error("no reports to aggregate");
  double sum = 0.0;
  for (const auto& r : reports) sum += r.mean_r;
  return sum / static_cast<double>(reports.size());
}

std::map<std::string, double> group_scores(const ScoreReport& report,
                                           const std::map<std::string, std::vector<Index>>& groups) {
  std::map<std::string, double> out;
  for (const auto& [name, indices] : groups) {
    if (indices.empty()) throw data_error("group '" + name + "' is empty");
    double sum = 0.0;
    for (Index i : indices) {
      if (i < 0 || i >= report.per_parcel_r.size())
        throw data_error("group '" + name + "' index " + std::to_string(i) + " out of range");
      sum += report.per_parcel_r(i);
    }
    out[name] = sum / static_cast<double>(indices.size());
  }
  return out;
}

namespace {
std::string fmt(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}
}  // namespace

void write_score_csv(const ScoreReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out << "parcel_index,r\n";
  for (Index j = 0; j < report.per_parcel_r.size(); ++j)
    out << j << ',' << fmt(report.per_parcel_r(j)) << '\n';
}

void write_score_json(const ScoreReport& report, const std::filesystem::path& path) {
  nlohmann::json j;
  j["subject_id"] = report.subject_id;
  j["mean_r"] = report.mean_r;
  j["parcels"] = report.per_parcel_r.size();
  j["degenerate_parcels"] = report.degenerate_parcels;
  if (!report.per_group_r.empty()) j["per_group_r"] = report.per_group_r;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

ScoreReport read_score_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw format_error("score report is not valid JSON: " + std::string(e.what()));
  }
  ScoreReport report;
  report.subject_id = j.value("subject_id", "");
  report.mean_r = j.at("mean_r").get<double>();
  if (j.contains("per_group_r"))
    report.per_group_r = j.at("per_group_r").get<std::map<std::string, double>>();
  return report;
}

std::map<std::string, std::vector<Index>> read_groups(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw format_error("groups sidecar is not valid JSON: " + std::string(e.what()));
  }
  std::map<std::string, std::vector<Index>> groups;
  for (const auto& [name, arr] : j.items()) groups[name] = arr.get<std::vector<Index>>();
  return groups;
}

}  // namespace mbe
