#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adaptk/core.hpp"
#include "adaptk/error.hpp"

namespace adaptk {

/// Per-column score mean and population standard deviation.
struct TagStats {
  std::vector<double> mu;
  std::vector<double> sigma;
};

inline TagStats tag_stats(const ScoreTable& table) {
  if (table.num_images() == 0)
    throw Error(ErrorKind::invalid_argument,
                "tag_stats: score table has no images");
  const std::size_t n_tags = table.num_tags();
  TagStats out{std::vector<double>(n_tags, 0.0),
               std::vector<double>(n_tags, 0.0)};
  // Welford; m2 accumulates squared deviations.
  std::vector<double> m2(n_tags, 0.0);
  for (std::size_t i = 0; i < table.num_images(); ++i) {
    auto row = table.row(i);
    const double n = static_cast<double>(i + 1);
    for (std::size_t j = 0; j < n_tags; ++j) {
      const double delta = row[j] - out.mu[j];
      out.mu[j] += delta / n;
      m2[j] += delta * (row[j] - out.mu[j]);
    }
  }
  const double n = static_cast<double>(table.num_images());
  for (std::size_t j = 0; j < n_tags; ++j)
    out.sigma[j] = std::sqrt(std::max(0.0, m2[j] / n));
  return out;
}

struct ScoredLabel {
  double score = 0.0;
  bool relevant = false;
};

namespace detail {

// Cut that selects every point, one unit below the minimum score.
inline double below(double min_score) {
  const double cut = min_score - 1.0;
  return cut < min_score
             ? cut
             : std::nextafter(min_score, -std::numeric_limits<double>::infinity());
}

}  // namespace detail

struct ThresholdFit {
  double tau = 0.0;
  double f = 0.0;  // F1 of "select iff score > tau" on the training points
};

/// F1-optimal cutoff for the rule "select iff score > tau".
///
/// Candidate cuts are the midpoints between consecutive distinct scores plus
/// one cut below the minimum score. Among equally good cuts the largest one
/// wins.
inline ThresholdFit learn_threshold(std::span<const ScoredLabel> points) {
  std::uint64_t positives = 0;
  for (const auto& p : points) {
    if (!std::isfinite(p.score))
      throw Error(ErrorKind::invalid_argument,
                  "learn_threshold: non-finite score");
    positives += p.relevant ? 1 : 0;
  }
  if (positives == 0 || positives == points.size())
    throw Error(ErrorKind::untrainable,
                positives == 0 ? "no positive labels" : "no negative labels");

  std::vector<ScoredLabel> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredLabel& a, const ScoredLabel& b) {
              return a.score > b.score;
            });

  // Walk cuts from the highest threshold down. F = 2tp / (selected + P);
  // candidates are compared by cross-multiplication to stay exact.
  std::uint64_t tp = 0, selected = 0;
  std::uint64_t best_tp = 0, best_sel = 0;
  double best_tau = 0.0;
  bool have_best = false;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double s = sorted[i].score;
    while (i < sorted.size() && sorted[i].score == s) {
      tp += sorted[i].relevant ? 1 : 0;
      ++selected;
      ++i;
    }
    const double tau =
        i < sorted.size() ? std::midpoint(sorted[i].score, s) : detail::below(s);
    const bool better =
        !have_best || tp * (best_sel + positives) > best_tp * (selected + positives);
    if (better) {
      best_tp = tp;
      best_sel = selected;
      best_tau = tau;
      have_best = true;
    }
  }
  return {best_tau, 2.0 * static_cast<double>(best_tp) /
                        static_cast<double>(best_sel + positives)};
}

struct LsqCoeffs {
  double a = 0.0;  // weight on mu
  double b = 0.0;  // weight on sigma
  double c = 0.0;  // intercept, zero unless fitted with one
  bool intercept = false;

  double operator()(double mu, double sigma) const {
    return a * mu + b * sigma + c;
  }
};

enum class ThresholdMode { mu_sigma, lsq, learned };

inline std::string_view to_string(ThresholdMode m) {
  switch (m) {
    case ThresholdMode::mu_sigma: return "mu_sigma";
    case ThresholdMode::lsq: return "lsq";
    case ThresholdMode::learned: return "learned";
  }
  return "unknown";
}

/// Learned per-tag cutoffs plus the score statistics they were learned with.
/// All vectors are indexed by vocabulary column.
struct ThresholdModel {
  std::vector<std::optional<double>> tau;
  std::vector<std::optional<double>> train_f;
  std::vector<std::size_t> untrainable;  // seen columns without a cutoff
  TagStats stats;
  std::optional<LsqCoeffs> lsq;

  bool has_tau(std::size_t tag) const {
    return tag < tau.size() && tau[tag].has_value();
  }

  /// Seen columns that carry a learned cutoff, in vocabulary order.
  std::vector<std::size_t> trainable_seen(const Vocabulary& vocab) const {
    std::vector<std::size_t> out;
    for (std::size_t t : vocab.seen())
      if (has_tau(t)) out.push_back(t);
    return out;
  }
};

namespace detail {

// Solves a small dense system in place by Gaussian elimination with partial
// pivoting. Returns false when a pivot is negligible relative to the matrix.
template <std::size_t N>
bool solve_dense(std::array<std::array<double, N>, N> m,
                 std::array<double, N> rhs, std::array<double, N>& x) {
  double scale = 0.0;
  for (const auto& r : m)
    for (double v : r) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return false;
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < N; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (std::abs(m[piv][col]) <= 1e-12 * scale) return false;
    std::swap(m[piv], m[col]);
    std::swap(rhs[piv], rhs[col]);
    for (std::size_t r = col + 1; r < N; ++r) {
      const double factor = m[r][col] / m[col][col];
      for (std::size_t k = col; k < N; ++k) m[r][k] -= factor * m[col][k];
      rhs[r] -= factor * rhs[col];
    }
  }
  for (std::size_t col = N; col-- > 0;) {
    double acc = rhs[col];
    for (std::size_t k = col + 1; k < N; ++k) acc -= m[col][k] * x[k];
    x[col] = acc / m[col][col];
  }
  return true;
}

}  // namespace detail

/// Least-squares fit of tau ~ a*mu + b*sigma (+ c) through the normal
/// equations.
inline LsqCoeffs fit_lsq(std::span<const double> mu,
                         std::span<const double> sigma,
                         std::span<const double> tau, bool intercept = false) {
  if (mu.size() != sigma.size() || mu.size() != tau.size())
    throw Error(ErrorKind::invalid_argument, "fit_lsq: size mismatch");
  if (mu.size() < 2)
    throw Error(ErrorKind::degenerate,
                "fit_lsq: need at least two tags with learned thresholds");
  LsqCoeffs out;
  out.intercept = intercept;
  if (!intercept) {
    std::array<std::array<double, 2>, 2> m{};
    std::array<double, 2> rhs{}, x{};
    for (std::size_t i = 0; i < mu.size(); ++i) {
      m[0][0] += mu[i] * mu[i];
      m[0][1] += mu[i] * sigma[i];
      m[1][1] += sigma[i] * sigma[i];
      rhs[0] += mu[i] * tau[i];
      rhs[1] += sigma[i] * tau[i];
    }
    m[1][0] = m[0][1];
    if (!detail::solve_dense<2>(m, rhs, x))
      throw Error(ErrorKind::degenerate,
                  "fit_lsq: normal equations are rank deficient");
    out.a = x[0];
    out.b = x[1];
  } else {
    std::array<std::array<double, 3>, 3> m{};
    std::array<double, 3> rhs{}, x{};
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const double f[3] = {mu[i], sigma[i], 1.0};
      for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 3; ++c) m[r][c] += f[r] * f[c];
        rhs[r] += f[r] * tau[i];
      }
    }
    if (!detail::solve_dense<3>(m, rhs, x))
      throw Error(ErrorKind::degenerate,
                  "fit_lsq: normal equations are rank deficient");
    out.a = x[0];
    out.b = x[1];
    out.c = x[2];
  }
  return out;
}

inline LsqCoeffs fit_lsq(const ThresholdModel& model, bool intercept = false) {
  std::vector<double> mu, sigma, tau;
  for (std::size_t t = 0; t < model.tau.size(); ++t) {
    if (!model.tau[t]) continue;
    mu.push_back(model.stats.mu.at(t));
    sigma.push_back(model.stats.sigma.at(t));
    tau.push_back(*model.tau[t]);
  }
  return fit_lsq(mu, sigma, tau, intercept);
}

struct ThresholdOptions {
  bool lsq_intercept = false;
};

/// Learns a cutoff for every seen tag that has both positive and negative
/// labels, records the rest as untrainable, and fits the lsq coefficients
/// when at least two cutoffs exist and the fit is well posed.
inline ThresholdModel learn_all_thresholds(const ScoreTable& table,
                                           const GroundTruth& truth,
                                           const Vocabulary& vocab,
                                           ThresholdOptions opts = {}) {
  if (!table.columns_match(vocab))
    throw Error(ErrorKind::invalid_argument,
                "score columns do not match the vocabulary");
  for (const auto& t : truth.coverage()) {
    const std::size_t j = vocab.index_of(t);
    if (!vocab.is_seen(j))
      throw Error(ErrorKind::invalid_argument,
                  "training labels cover novel tag '" + t + "'");
  }

  // Row index of every labelled image, in truth order.
  std::vector<std::pair<std::size_t, const GroundTruth::TagLabels*>> rows;
  rows.reserve(truth.images().size());
  for (const auto& img : truth.images())
    rows.emplace_back(table.image_index(img), truth.labels_of(img));

  ThresholdModel model;
  model.tau.assign(vocab.size(), std::nullopt);
  model.train_f.assign(vocab.size(), std::nullopt);
  std::vector<ScoredLabel> points;
  for (std::size_t t : vocab.seen()) {
    points.clear();
    const std::string& name = vocab.tag(t);
    for (const auto& [row, labels] : rows) {
      auto it = labels->find(name);
      if (it != labels->end()) points.push_back({table.at(row, t), it->second});
    }
    try {
      const ThresholdFit fit = learn_threshold(points);
      model.tau[t] = fit.tau;
      model.train_f[t] = fit.f;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::untrainable) throw;
      model.untrainable.push_back(t);
    }
  }
  model.stats = tag_stats(table);
  try {
    model.lsq = fit_lsq(model, opts.lsq_intercept);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::degenerate) throw;
  }
  return model;
}

/// Threshold for one tag, using the statistics stored in the model.
inline double predict_threshold(const ThresholdModel& model, std::size_t tag,
                                ThresholdMode mode) {
  switch (mode) {
    case ThresholdMode::mu_sigma:
      return model.stats.mu.at(tag) + model.stats.sigma.at(tag);
    case ThresholdMode::lsq:
      if (!model.lsq)
        throw Error(ErrorKind::degenerate, "lsq coefficients are not fitted");
      return (*model.lsq)(model.stats.mu.at(tag), model.stats.sigma.at(tag));
    case ThresholdMode::learned:
      if (!model.has_tau(tag))
        throw Error(ErrorKind::not_found,
                    "no learned threshold for column " + std::to_string(tag));
      return *model.tau[tag];
  }
  throw Error(ErrorKind::invalid_argument, "unknown threshold mode");
}

/// Statistic-based thresholds for every column, computed from `stats`
/// (typically the batch being annotated) rather than the training stats.
inline std::vector<std::optional<double>> predicted_thresholds(
    const ThresholdModel& model, const TagStats& stats, ThresholdMode mode) {
  if (mode == ThresholdMode::learned) return model.tau;
  if (mode == ThresholdMode::lsq && !model.lsq)
    throw Error(ErrorKind::degenerate, "lsq coefficients are not fitted");
  std::vector<std::optional<double>> out(stats.mu.size());
  for (std::size_t t = 0; t < out.size(); ++t)
    out[t] = mode == ThresholdMode::mu_sigma
                 ? stats.mu[t] + stats.sigma[t]
                 : (*model.lsq)(stats.mu[t], stats.sigma[t]);
  return out;
}

}  // namespace adaptk
