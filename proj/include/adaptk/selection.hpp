#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adaptk/core.hpp"
#include "adaptk/error.hpp"
#include "adaptk/parallel.hpp"
#include "adaptk/similarity.hpp"
#include "adaptk/thresholds.hpp"

namespace adaptk {

/// Per-column thresholds; columns without a value have no cutoff.
using ThresholdVector = std::vector<std::optional<double>>;

struct AdaptiveConfig {
  std::size_t fallback_k = 5;
  bool refine = false;
  double w = 0.5;
  // Report refined novel scores in the output instead of the raw ones.
  // Ranking always uses the refined scores when refine is on.
  bool report_refined = false;

  void validate() const {
    if (fallback_k < 1)
      throw Error(ErrorKind::invalid_argument, "fallback_k must be >= 1");
    if (!(w >= 0.0 && w <= 1.0))
      throw Error(ErrorKind::invalid_argument, "w must lie in [0, 1]");
  }
};

/// The k highest-ranked tags of one image, flagged as fallback picks.
inline SelectionRow select_topk(const ScoreTable& table, std::size_t image,
                                std::size_t k) {
  if (k < 1 || k > table.num_tags())
    throw Error(ErrorKind::invalid_argument,
                "k=" + std::to_string(k) + " outside [1, " +
                    std::to_string(table.num_tags()) + "]");
  const auto ranking = rank_tags(table, image);
  SelectionRow row{table.images()[image], {}};
  row.tags.reserve(k);
  for (std::size_t r = 0; r < k; ++r)
    row.tags.push_back(
        {ranking[r], table.at(image, ranking[r]), Provenance::fallback});
  return row;
}

/// Columns in `subset` whose score strictly exceeds their threshold, in
/// ranking order.
inline std::vector<std::size_t> select_by_threshold(
    const ScoreTable& table, std::size_t image,
    std::span<const std::optional<double>> thresholds,
    std::span<const std::size_t> subset) {
  auto row = table.row(image);
  std::vector<std::size_t> picked;
  for (std::size_t t : subset) {
    if (t >= thresholds.size() || !thresholds[t])
      throw Error(ErrorKind::not_found,
                  "no threshold for tag '" + table.tags().at(t) + "'");
    if (!std::isfinite(row[t]))
      throw Error(ErrorKind::invalid_argument,
                  "non-finite score for tag '" + table.tags()[t] + "'");
    if (row[t] > *thresholds[t]) picked.push_back(t);
  }
  return rank_subset(row, table.lex_rank(), picked);
}

/// Number of novel tags to pick given |A| of `seen_size` seen tags:
/// round-half-up(novel_size * a_size / seen_size), capped at novel_size.
inline std::size_t k_novel(std::size_t seen_size, std::size_t novel_size,
                           std::size_t a_size) {
  if (seen_size < 1)
    throw Error(ErrorKind::invalid_argument, "k_novel: seen_size must be >= 1");
  if (a_size > seen_size)
    throw Error(ErrorKind::invalid_argument,
                "k_novel: a_size exceeds seen_size");
  // floor((2*n*a + s) / (2*s)) == floor(n*a/s + 1/2), in exact integers.
  const std::uint64_t num = 2 * static_cast<std::uint64_t>(novel_size) *
                                static_cast<std::uint64_t>(a_size) +
                            seen_size;
  const std::uint64_t k = num / (2 * static_cast<std::uint64_t>(seen_size));
  return std::min<std::size_t>(static_cast<std::size_t>(k), novel_size);
}

/// Propagates evidence from the thresholded seen tags `selected` to the
/// novel tags:
///
///   f(t) <- w f(t) + (1 - w) / |A| * sum_{t' in A} sim(t, t') (f(t') / tau(t') - 1)
///
/// Returns the full score row with only novel columns updated.
inline std::vector<double> refine_novel_scores(
    const ScoreTable& table, std::size_t image,
    std::span<const std::size_t> selected, const Vocabulary& vocab,
    const ThresholdModel& model, const SimilarityMatrix& sim, double w) {
  if (selected.empty())
    throw Error(ErrorKind::invalid_argument,
                "refinement needs at least one thresholded seen tag");
  if (!(w >= 0.0 && w <= 1.0))
    throw Error(ErrorKind::invalid_argument, "w must lie in [0, 1]");
  if (sim.size() != vocab.size())
    throw Error(ErrorKind::invalid_argument,
                "similarity matrix does not match the vocabulary");
  auto row = table.row(image);
  std::vector<double> normalized;
  normalized.reserve(selected.size());
  for (std::size_t s : selected) {
    const double tau = predict_threshold(model, s, ThresholdMode::learned);
    if (!(tau > 0.0))
      throw Error(ErrorKind::degenerate,
                  "threshold of '" + vocab.tag(s) +
                      "' is not positive; scores cannot be normalized");
    normalized.push_back(row[s] / tau - 1.0);
  }
  std::vector<double> out(row.begin(), row.end());
  const double inv = 1.0 / static_cast<double>(selected.size());
  for (std::size_t t : vocab.novel()) {
    double acc = 0.0;
    for (std::size_t k = 0; k < selected.size(); ++k)
      acc += sim(t, selected[k]) * normalized[k];
    out[t] = w * row[t] + (1.0 - w) * inv * acc;
  }
  return out;
}

/// Thresholds the trainable seen tags, then extends the pick with a
/// proportional number of novel tags. Falls back to top-k over the whole
/// vocabulary when no seen tag passes its threshold.
///
/// `sim` is only read when cfg.refine is set.
inline SelectionRow select_adaptive(const ScoreTable& table, std::size_t image,
                                    const Vocabulary& vocab,
                                    const ThresholdModel& model,
                                    const SimilarityMatrix* sim,
                                    const AdaptiveConfig& cfg) {
  cfg.validate();
  const auto pool = model.trainable_seen(vocab);
  const auto a = select_by_threshold(table, image, model.tau, pool);
  if (a.empty()) return select_topk(table, image, cfg.fallback_k);

  auto raw = table.row(image);
  SelectionRow row{table.images()[image], {}};
  for (std::size_t t : a)
    row.tags.push_back({t, raw[t], Provenance::seen_threshold});

  const std::size_t k = k_novel(pool.size(), vocab.novel().size(), a.size());
  if (k == 0) return row;

  std::vector<double> refined;
  std::span<const double> scores = raw;
  if (cfg.refine) {
    if (!sim)
      throw Error(ErrorKind::invalid_argument,
                  "refinement requested without a similarity matrix");
    refined = refine_novel_scores(table, image, a, vocab, model, *sim, cfg.w);
    scores = refined;
  }
  const auto ranked = rank_subset(scores, table.lex_rank(), vocab.novel());
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t t = ranked[r];
    const double reported = cfg.refine && cfg.report_refined ? scores[t] : raw[t];
    row.tags.push_back({t, reported, Provenance::novel_topk});
  }
  return row;
}

/// Applies a per-image selector to every row of the table.
template <typename RowSelector>
SelectionResult select_each(const ScoreTable& table, RowSelector&& selector,
                            std::size_t jobs = 1) {
  SelectionResult out;
  out.rows.resize(table.num_images());
  parallel_for(table.num_images(), jobs,
               [&](std::size_t i) { out.rows[i] = selector(i); });
  return out;
}

}  // namespace adaptk
