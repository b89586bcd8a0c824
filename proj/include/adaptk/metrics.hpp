#pragma once

#include <algorithm>
#include <cstddef>
#include <ranges>
#include <string>
#include <unordered_set>
#include <vector>

#include "adaptk/core.hpp"
#include "adaptk/error.hpp"

namespace adaptk {

struct ImageF {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

/// Set-based precision, recall and F1 of a predicted tag set against the
/// relevant set. An empty prediction scores zero on all three.
template <std::ranges::input_range Relevant, std::ranges::input_range Predicted>
ImageF f_image(const Relevant& relevant, const Predicted& predicted) {
  using Tag = std::ranges::range_value_t<Relevant>;
  std::unordered_set<Tag> r(std::ranges::begin(relevant),
                            std::ranges::end(relevant));
  if (r.empty())
    throw Error(ErrorKind::invalid_argument,
                "f_image: relevant set must be non-empty");
  std::unordered_set<Tag> p(std::ranges::begin(predicted),
                            std::ranges::end(predicted));
  if (p.empty()) return {};
  std::size_t hits = 0;
  for (const auto& t : p) hits += r.count(t);
  ImageF out;
  out.precision = static_cast<double>(hits) / static_cast<double>(p.size());
  out.recall = static_cast<double>(hits) / static_cast<double>(r.size());
  if (out.precision + out.recall > 0.0)
    out.f = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

/// Average precision of a tag ranking:
///   (1/|R|) * sum_i (r_i / i) * [ranked[i] in R]
/// where r_i counts relevant tags among the first i.
template <std::ranges::input_range Relevant, std::ranges::input_range Ranked>
double ap_image(const Relevant& relevant, const Ranked& ranked) {
  using Tag = std::ranges::range_value_t<Relevant>;
  std::unordered_set<Tag> r(std::ranges::begin(relevant),
                            std::ranges::end(relevant));
  if (r.empty())
    throw Error(ErrorKind::invalid_argument,
                "ap_image: relevant set must be non-empty");
  std::unordered_set<Tag> seen;
  std::size_t i = 0, hits = 0;
  double acc = 0.0;
  for (const auto& t : ranked) {
    ++i;
    if (!seen.insert(t).second)
      throw Error(ErrorKind::invalid_argument,
                  "ap_image: ranking contains a duplicate tag");
    if (r.count(t)) {
      ++hits;
      acc += static_cast<double>(hits) / static_cast<double>(i);
    }
  }
  return acc / static_cast<double>(r.size());
}

struct ImageEvaluation {
  std::string image;
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
  double ap = 0.0;
};

struct EvaluationReport {
  std::vector<ImageEvaluation> images;
  double mf = 0.0;
  double map = 0.0;
  std::size_t excluded_incomplete = 0;   // labels missing for some tag
  std::size_t excluded_no_relevant = 0;  // no relevant tag at all

  std::size_t included() const noexcept { return images.size(); }
  std::size_t excluded() const noexcept {
    return excluded_incomplete + excluded_no_relevant;
  }
};

struct EvaluationOptions {
  // When false, partially labelled images are scored on their labelled tags
  // only instead of being excluded.
  bool require_full_coverage = true;
};

namespace detail {

// Order-independent mean: summing in sorted order makes the result exactly
// invariant to the order the images were processed in.
inline double sorted_mean(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace detail

/// Scores selections (F-image) and rankings (AP-image) per image and
/// averages them into MF-image / MAP-image. `rankings[i]` is the tag ranking
/// of `selections.rows[i].image`.
inline EvaluationReport evaluate(const GroundTruth& truth,
                                 const Vocabulary& vocab,
                                 const SelectionResult& selections,
                                 const std::vector<std::vector<std::size_t>>& rankings,
                                 EvaluationOptions opts = {}) {
  if (rankings.size() != selections.rows.size())
    throw Error(ErrorKind::invalid_argument,
                "evaluate: one ranking per selection row is required");
  EvaluationReport report;
  std::vector<double> fs, aps;
  std::vector<char> labelled(vocab.size());
  std::vector<std::size_t> relevant, predicted, ranking;
  for (std::size_t i = 0; i < selections.rows.size(); ++i) {
    const auto& row = selections.rows[i];
    const auto* labels = truth.labels_of(row.image);
    if (!labels) {
      ++report.excluded_incomplete;
      continue;
    }
    std::fill(labelled.begin(), labelled.end(), 0);
    relevant.clear();
    bool complete = true;
    for (std::size_t t = 0; t < vocab.size(); ++t) {
      auto it = labels->find(vocab.tag(t));
      if (it == labels->end()) {
        complete = false;
        continue;
      }
      labelled[t] = 1;
      if (it->second) relevant.push_back(t);
    }
    if (!complete && opts.require_full_coverage) {
      ++report.excluded_incomplete;
      continue;
    }
    if (relevant.empty()) {
      ++report.excluded_no_relevant;
      continue;
    }
    predicted.clear();
    for (const auto& s : row.tags)
      if (s.tag < vocab.size() && labelled[s.tag]) predicted.push_back(s.tag);
    ranking.clear();
    for (std::size_t t : rankings[i])
      if (t < vocab.size() && labelled[t]) ranking.push_back(t);

    const ImageF f = f_image(relevant, predicted);
    const double ap = ap_image(relevant, ranking);
    report.images.push_back({row.image, f.precision, f.recall, f.f, ap});
    fs.push_back(f.f);
    aps.push_back(ap);
  }
  report.mf = detail::sorted_mean(std::move(fs));
  report.map = detail::sorted_mean(std::move(aps));
  return report;
}

}  // namespace adaptk
