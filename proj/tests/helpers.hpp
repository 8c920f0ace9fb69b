#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mbe/rng.hpp"
#include "mbe/time_series.hpp"

namespace test_util {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& g) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = mbe::rng::normal(g);
  return m;
}

inline mbe::TimeSeriesMatrix random_series(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& g,
                                           std::vector<Eigen::Index> boundaries = {0}) {
  return mbe::make_series(random_matrix(rows, cols, g), std::move(boundaries));
}

// Unique scratch directory, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0;; ++i) {
      auto candidate = base / (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(i));
      std::error_code ec;
      if (std::filesystem::create_directories(candidate, ec)) {
        path = candidate;
        return;
      }
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

// Best label-permutation accuracy between a decoded state sequence and the
// planted one (brute force over K! permutations; fine for small K).
inline double permuted_accuracy(const std::vector<int>& decoded, const std::vector<int>& truth,
                                int k) {
  std::vector<int> perm(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) perm[static_cast<std::size_t>(i)] = i;
  double best = 0.0;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < decoded.size(); ++i)
      if (perm[static_cast<std::size_t>(decoded[i])] == truth[i]) ++hits;
    best = std::max(best, static_cast<double>(hits) / static_cast<double>(decoded.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// The permutation realizing the best accuracy (decoded label -> truth label).
inline std::vector<int> best_permutation(const std::vector<int>& decoded,
                                         const std::vector<int>& truth, int k) {
  std::vector<int> perm(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::vector<int> best_perm = perm;
  std::size_t best_hits = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < decoded.size(); ++i)
      if (perm[static_cast<std::size_t>(decoded[i])] == truth[i]) ++hits;
    if (hits > best_hits) {
      best_hits = hits;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best_perm;
}

}  // namespace test_util
