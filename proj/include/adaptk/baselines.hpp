#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adaptk/core.hpp"
#include "adaptk/error.hpp"
#include "adaptk/metrics.hpp"
#include "adaptk/selection.hpp"
#include "adaptk/similarity.hpp"
#include "adaptk/thresholds.hpp"

namespace adaptk {

enum class StrategyName {
  top_k,
  mu_sigma,
  lsq,
  hybrid_tau_musigma,
  hybrid_tau_lsq,
  adaptive,
};

inline std::string_view to_string(StrategyName s) {
  switch (s) {
    case StrategyName::top_k: return "top_k";
    case StrategyName::mu_sigma: return "mu_sigma";
    case StrategyName::lsq: return "lsq";
    case StrategyName::hybrid_tau_musigma: return "hybrid_tau_musigma";
    case StrategyName::hybrid_tau_lsq: return "hybrid_tau_lsq";
    case StrategyName::adaptive: return "adaptive";
  }
  return "unknown";
}

inline StrategyName parse_strategy(std::string_view s) {
  for (auto n : {StrategyName::top_k, StrategyName::mu_sigma, StrategyName::lsq,
                 StrategyName::hybrid_tau_musigma, StrategyName::hybrid_tau_lsq,
                 StrategyName::adaptive})
    if (to_string(n) == s) return n;
  throw Error(ErrorKind::invalid_argument,
              "unknown strategy '" + std::string(s) + "'");
}

struct StrategySpec {
  StrategyName name = StrategyName::adaptive;
  std::size_t k = 5;       // top_k only
  AdaptiveConfig adaptive;  // adaptive only

  bool needs_model() const { return name != StrategyName::top_k; }

  /// Row label for comparison tables, e.g. "top_5".
  std::string label() const {
    if (name == StrategyName::top_k) return "top_" + std::to_string(k);
    if (name == StrategyName::adaptive && adaptive.refine)
      return "adaptive_refined";
    return std::string(to_string(name));
  }
};

/// The six tag-selection rows compared head to head: top-5, mu+sigma,
/// lsq(mu, sigma), the two learned-tau hybrids, and the adaptive method.
inline std::vector<StrategySpec> standard_strategies(AdaptiveConfig cfg = {}) {
  return {{StrategyName::top_k, 5, cfg},
          {StrategyName::mu_sigma, 5, cfg},
          {StrategyName::lsq, 5, cfg},
          {StrategyName::hybrid_tau_musigma, 5, cfg},
          {StrategyName::hybrid_tau_lsq, 5, cfg},
          {StrategyName::adaptive, 5, cfg}};
}

namespace detail {

inline SelectionResult threshold_everything(const ScoreTable& table,
                                            const Vocabulary& vocab,
                                            const ThresholdVector& thresholds,
                                            std::span<const std::size_t> pool,
                                            std::size_t jobs) {
  return select_each(
      table,
      [&](std::size_t i) {
        SelectionRow row{table.images()[i], {}};
        for (std::size_t t : select_by_threshold(table, i, thresholds, pool))
          row.tags.push_back({t, table.at(i, t),
                              vocab.is_seen(t) && thresholds[t]
                                  ? Provenance::seen_threshold
                                  : Provenance::predicted_threshold});
        return row;
      },
      jobs);
}

}  // namespace detail

/// Runs one selection strategy over every image of `table`.
///
/// Statistic-based thresholds (mu+sigma, lsq) use the mean and deviation of
/// `table` itself, so they need no labels. Hybrids keep the learned cutoffs
/// on trainable seen tags and use predicted cutoffs on novel tags; untrainable
/// seen tags are never selected, as in the adaptive method.
inline SelectionResult run_strategy(const StrategySpec& spec,
                                    const ScoreTable& table,
                                    const Vocabulary& vocab,
                                    const ThresholdModel* model,
                                    const SimilarityMatrix* sim,
                                    std::size_t jobs = 1) {
  if (!table.columns_match(vocab))
    throw Error(ErrorKind::invalid_argument,
                "score columns do not match the vocabulary");
  if (spec.needs_model() && !model)
    throw Error(ErrorKind::invalid_argument,
                "strategy '" + spec.label() + "' needs a threshold model");

  switch (spec.name) {
    case StrategyName::top_k:
      return select_each(
          table, [&](std::size_t i) { return select_topk(table, i, spec.k); },
          jobs);

    case StrategyName::mu_sigma:
    case StrategyName::lsq: {
      const auto mode = spec.name == StrategyName::mu_sigma
                            ? ThresholdMode::mu_sigma
                            : ThresholdMode::lsq;
      ThresholdVector thr = predicted_thresholds(*model, tag_stats(table), mode);
      std::vector<std::size_t> all(vocab.size());
      for (std::size_t t = 0; t < all.size(); ++t) all[t] = t;
      return select_each(
          table,
          [&](std::size_t i) {
            SelectionRow row{table.images()[i], {}};
            for (std::size_t t : select_by_threshold(table, i, thr, all))
              row.tags.push_back(
                  {t, table.at(i, t), Provenance::predicted_threshold});
            return row;
          },
          jobs);
    }

    case StrategyName::hybrid_tau_musigma:
    case StrategyName::hybrid_tau_lsq: {
      const auto mode = spec.name == StrategyName::hybrid_tau_musigma
                            ? ThresholdMode::mu_sigma
                            : ThresholdMode::lsq;
      const ThresholdVector predicted =
          predicted_thresholds(*model, tag_stats(table), mode);
      ThresholdVector thr(vocab.size());
      std::vector<std::size_t> pool = model->trainable_seen(vocab);
      for (std::size_t t : pool) thr[t] = model->tau[t];
      for (std::size_t t : vocab.novel()) {
        thr[t] = predicted[t];
        pool.push_back(t);
      }
      return detail::threshold_everything(table, vocab, thr, pool, jobs);
    }

    case StrategyName::adaptive:
      spec.adaptive.validate();
      if (spec.adaptive.refine && !sim)
        throw Error(ErrorKind::invalid_argument,
                    "refinement requested without a similarity matrix");
      return select_each(
          table,
          [&](std::size_t i) {
            return select_adaptive(table, i, vocab, *model, sim, spec.adaptive);
          },
          jobs);
  }
  throw Error(ErrorKind::invalid_argument, "unknown strategy");
}

struct ComparisonRow {
  std::string name;
  EvaluationReport report;
  double mean_selected = 0.0;  // average tags selected per image
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  bool shared_map = true;  // every row scored the same rankings to 1e-12
};

/// Evaluates each strategy on the same score table. All rows share the raw
/// score rankings, so their MAP must agree.
inline Comparison compare(std::span<const StrategySpec> strategies,
                          const ScoreTable& table, const GroundTruth& truth,
                          const Vocabulary& vocab, const ThresholdModel* model,
                          const SimilarityMatrix* sim,
                          EvaluationOptions eval_opts = {},
                          std::size_t jobs = 1) {
  std::vector<std::vector<std::size_t>> rankings(table.num_images());
  parallel_for(table.num_images(), jobs,
               [&](std::size_t i) { rankings[i] = rank_tags(table, i); });

  Comparison out;
  for (const auto& spec : strategies) {
    const SelectionResult sel = run_strategy(spec, table, vocab, model, sim, jobs);
    ComparisonRow row{spec.label(), evaluate(truth, vocab, sel, rankings, eval_opts)};
    std::size_t total = 0;
    for (const auto& r : sel.rows) total += r.tags.size();
    row.mean_selected = sel.rows.empty()
                            ? 0.0
                            : static_cast<double>(total) /
                                  static_cast<double>(sel.rows.size());
    out.rows.push_back(std::move(row));
  }
  for (const auto& r : out.rows)
    if (std::abs(r.report.map - out.rows.front().report.map) > 1e-12)
      out.shared_map = false;
  if (!out.shared_map)
    throw Error(ErrorKind::degenerate,
                "strategies disagree on MAP despite shared rankings");
  return out;
}

}  // namespace adaptk
