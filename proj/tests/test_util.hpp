#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "adaptk/core.hpp"

namespace testutil {

inline adaptk::Vocabulary vocab(std::vector<std::string> seen,
                                std::vector<std::string> novel = {}) {
  std::vector<std::pair<std::string, adaptk::Partition>> e;
  for (auto& s : seen) e.emplace_back(std::move(s), adaptk::Partition::seen);
  for (auto& s : novel) e.emplace_back(std::move(s), adaptk::Partition::novel);
  return adaptk::Vocabulary(std::move(e));
}

inline std::vector<std::string> names(const char* prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

inline adaptk::ScoreTable random_table(const adaptk::Vocabulary& v,
                                       std::size_t n_images, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> values(n_images * v.size());
  for (double& x : values) x = d(rng);
  return adaptk::ScoreTable(names("img", n_images), v, std::move(values));
}

}  // namespace testutil
