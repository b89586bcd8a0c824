#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adaptk/core.hpp"
#include "adaptk/error.hpp"
#include "adaptk/metrics.hpp"
#include "adaptk/parallel.hpp"
#include "adaptk/selection.hpp"
#include "adaptk/thresholds.hpp"

namespace adaptk {

enum class Objective { mf, map };

inline std::string_view to_string(Objective o) {
  return o == Objective::mf ? "mf" : "map";
}

struct FusionModel {
  std::vector<double> weights;  // on the simplex, one per source table
  Objective objective = Objective::mf;
  std::vector<double> history;  // objective at start, then after each sweep

  double final_objective() const {
    return history.empty() ? 0.0 : history.back();
  }
};

inline void check_weights(std::span<const double> weights, std::size_t m) {
  if (weights.size() != m)
    throw Error(ErrorKind::invalid_argument,
                "expected " + std::to_string(m) + " fusion weights, got " +
                    std::to_string(weights.size()));
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw Error(ErrorKind::invalid_argument,
                  "fusion weights must be finite and non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw Error(ErrorKind::invalid_argument, "fusion weights must sum to 1");
}

/// Element-wise weighted sum of score tables with identical shape.
inline ScoreTable fuse(std::span<const ScoreTable> tables,
                       std::span<const double> weights) {
  if (tables.empty())
    throw Error(ErrorKind::invalid_argument, "fuse: no score tables");
  check_weights(weights, tables.size());
  const ScoreTable& first = tables.front();
  for (const auto& t : tables.subspan(1))
    if (t.images() != first.images() || t.tags() != first.tags())
      throw Error(ErrorKind::invalid_argument,
                  "fuse: score tables differ in images or tag columns");
  std::vector<double> values(first.values().size(), 0.0);
  for (std::size_t m = 0; m < tables.size(); ++m) {
    const auto& src = tables[m].values();
    for (std::size_t k = 0; k < values.size(); ++k)
      values[k] += weights[m] * src[k];
  }
  return ScoreTable(first.images(), first.tags(), std::move(values));
}

struct CoordinateAscentOptions {
  double grid_step = 0.05;
  std::size_t max_sweeps = 20;
  double tolerance = 1e-9;
  std::size_t jobs = 1;
};

using FusionObjective = std::function<double(const ScoreTable&)>;

namespace detail {

// Sets coordinate i to v and spreads 1 - v over the other coordinates in
// proportion to their current mass (uniformly if they hold none).
inline std::vector<double> replace_coordinate(const std::vector<double>& w,
                                              std::size_t i, double v) {
  std::vector<double> out(w.size());
  double rest = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k)
    if (k != i) rest += w[k];
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (k == i)
      out[k] = v;
    else if (rest > 0.0)
      out[k] = (1.0 - v) * w[k] / rest;
    else
      out[k] = (1.0 - v) / static_cast<double>(w.size() - 1);
  }
  const double sum = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& x : out) x /= sum;
  return out;
}

}  // namespace detail

/// Coordinate ascent over simplex weights, starting from uniform. Each
/// coordinate tries every grid value in {0, step, ..., 1}; a candidate is
/// accepted only if it strictly beats the current objective.
inline FusionModel learn_weights(std::span<const ScoreTable> tables,
                                 const FusionObjective& objective,
                                 Objective name,
                                 const CoordinateAscentOptions& opts = {}) {
  const std::size_t m = tables.size();
  if (m < 2)
    throw Error(ErrorKind::invalid_argument,
                "learn_weights needs at least two score tables");
  if (!(opts.grid_step > 0.0 && opts.grid_step <= 1.0))
    throw Error(ErrorKind::invalid_argument, "grid_step must lie in (0, 1]");

  std::vector<double> grid;
  const auto steps = static_cast<std::size_t>(std::llround(1.0 / opts.grid_step));
  for (std::size_t g = 0; g <= steps; ++g)
    grid.push_back(std::min(1.0, static_cast<double>(g) * opts.grid_step));
  if (grid.back() < 1.0) grid.push_back(1.0);

  FusionModel model;
  model.objective = name;
  model.weights.assign(m, 1.0 / static_cast<double>(m));
  double current = objective(fuse(tables, model.weights));
  model.history.push_back(current);

  std::vector<double> values(grid.size());
  for (std::size_t sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    const double start = current;
    for (std::size_t i = 0; i < m; ++i) {
      parallel_for(grid.size(), opts.jobs, [&](std::size_t g) {
        values[g] = objective(
            fuse(tables, detail::replace_coordinate(model.weights, i, grid[g])));
      });
      std::size_t best = grid.size();
      double best_value = current;
      for (std::size_t g = 0; g < grid.size(); ++g)
        if (values[g] > best_value) {
          best_value = values[g];
          best = g;
        }
      if (best < grid.size()) {
        model.weights = detail::replace_coordinate(model.weights, i, grid[best]);
        current = best_value;
      }
    }
    model.history.push_back(current);
    if (current - start < opts.tolerance) break;
  }
  return model;
}

/// How the training objective turns a fused table into tag selections.
struct TrainingSelection {
  enum class Kind { learned_threshold, top_k } kind = Kind::learned_threshold;
  std::size_t k = 5;
};

/// MF or MAP on the labelled training images, scored over each image's
/// labelled tags. With learned_threshold selection the per-tag cutoffs are
/// re-learned on every candidate fusion.
inline FusionObjective training_objective(const GroundTruth& truth,
                                          const Vocabulary& vocab,
                                          Objective objective,
                                          TrainingSelection selection = {}) {
  return [&truth, &vocab, objective, selection](const ScoreTable& fused) {
    std::vector<std::size_t> rows;
    for (const auto& img : truth.images())
      rows.push_back(fused.image_index(img));

    SelectionResult sel;
    std::vector<std::vector<std::size_t>> rankings;
    if (objective == Objective::map) {
      for (std::size_t r : rows) {
        sel.rows.push_back({fused.images()[r], {}});
        rankings.push_back(rank_tags(fused, r));
      }
    } else if (selection.kind == TrainingSelection::Kind::learned_threshold) {
      const ThresholdModel model = learn_all_thresholds(fused, truth, vocab);
      const auto pool = model.trainable_seen(vocab);
      for (std::size_t r : rows) {
        SelectionRow row{fused.images()[r], {}};
        for (std::size_t t : select_by_threshold(fused, r, model.tau, pool))
          row.tags.push_back({t, fused.at(r, t), Provenance::seen_threshold});
        sel.rows.push_back(std::move(row));
        rankings.emplace_back();
      }
    } else {
      std::vector<std::size_t> covered;
      for (const auto& t : truth.coverage()) covered.push_back(vocab.index_of(t));
      for (std::size_t r : rows) {
        const auto ranked = rank_subset(fused.row(r), fused.lex_rank(), covered);
        SelectionRow row{fused.images()[r], {}};
        for (std::size_t q = 0; q < std::min(selection.k, ranked.size()); ++q)
          row.tags.push_back({ranked[q], fused.at(r, ranked[q]),
                              Provenance::fallback});
        sel.rows.push_back(std::move(row));
        rankings.emplace_back();
      }
    }
    const EvaluationReport report =
        evaluate(truth, vocab, sel, rankings, {.require_full_coverage = false});
    if (report.included() == 0)
      throw Error(ErrorKind::degenerate,
                  "no training image has a relevant labelled tag");
    return objective == Objective::mf ? report.mf : report.map;
  };
}

/// Convenience overload: learns weights against the training objective.
inline FusionModel learn_weights(std::span<const ScoreTable> tables,
                                 const GroundTruth& truth,
                                 const Vocabulary& vocab, Objective objective,
                                 TrainingSelection selection = {},
                                 const CoordinateAscentOptions& opts = {}) {
  return learn_weights(tables,
                       training_objective(truth, vocab, objective, selection),
                       objective, opts);
}

}  // namespace adaptk
