#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adaptk/core.hpp"
#include "adaptk/error.hpp"

namespace adaptk {

/// Tag occurrence and co-occurrence counts over a reference collection of
/// `total` items. Pair counts are keyed by the unordered tag pair.
class CooccurrenceStats {
 public:
  using PairKey = std::pair<std::string, std::string>;

  CooccurrenceStats() = default;

  CooccurrenceStats(std::uint64_t total,
                    std::map<std::string, std::uint64_t, std::less<>> single,
                    const std::map<PairKey, std::uint64_t>& pairs)
      : total_(total), single_(std::move(single)) {
    for (const auto& [key, count] : pairs) {
      auto [it, fresh] = pair_.emplace(ordered(key.first, key.second), count);
      if (!fresh && it->second != count)
        throw Error(ErrorKind::invalid_argument,
                    "conflicting pair counts for (" + key.first + ", " +
                        key.second + ")");
    }
  }

  std::uint64_t total() const noexcept { return total_; }

  bool has(std::string_view tag) const {
    return single_.find(tag) != single_.end();
  }

  std::uint64_t single(std::string_view tag) const {
    auto it = single_.find(tag);
    return it == single_.end() ? 0 : it->second;
  }

  /// Co-occurrence count; a tag's pair with itself defaults to its own count.
  std::uint64_t pair(std::string_view a, std::string_view b) const {
    auto it = pair_.find(ordered(std::string(a), std::string(b)));
    if (it != pair_.end()) return it->second;
    return a == b ? single(a) : 0;
  }

  const std::map<std::string, std::uint64_t, std::less<>>& singles() const {
    return single_;
  }
  const std::map<PairKey, std::uint64_t>& pairs() const { return pair_; }

  /// Lists every stored count that breaks the counting invariants
  /// (pair <= min of singles, single <= total).
  std::vector<std::string> check() const {
    std::vector<std::string> out;
    if (total_ == 0) out.push_back("collection size is zero");
    for (const auto& [tag, n] : single_)
      if (n > total_)
        out.push_back("single(" + tag + ")=" + std::to_string(n) +
                      " exceeds total " + std::to_string(total_));
    for (const auto& [key, n] : pair_) {
      const auto lim = std::min(single(key.first), single(key.second));
      if (n > lim)
        out.push_back("pair(" + key.first + ", " + key.second +
                      ")=" + std::to_string(n) + " exceeds min single " +
                      std::to_string(lim));
    }
    return out;
  }

  friend bool operator==(const CooccurrenceStats&,
                         const CooccurrenceStats&) = default;

 private:
  static PairKey ordered(std::string a, std::string b) {
    if (b < a) std::swap(a, b);
    return {std::move(a), std::move(b)};
  }

  std::uint64_t total_ = 0;
  std::map<std::string, std::uint64_t, std::less<>> single_;
  std::map<PairKey, std::uint64_t> pair_;
};

/// Normalized Google Distance between two tags, natural log.
///
/// Returns +inf when the tags never co-occur. A negative numerator, which
/// only noisy counts can produce, is clamped to zero.
inline double ngd(const CooccurrenceStats& stats, std::string_view t,
                  std::string_view u) {
  const std::uint64_t ft = stats.single(t);
  const std::uint64_t fu = stats.single(u);
  if (ft == 0 || fu == 0)
    throw Error(ErrorKind::degenerate,
                "NGD undefined: tag '" +
                    std::string(ft == 0 ? t : u) + "' has zero count");
  if (stats.total() < 2)
    throw Error(ErrorKind::degenerate, "NGD undefined: collection size < 2");
  if (ft > stats.total() || fu > stats.total())
    throw Error(ErrorKind::degenerate,
                "NGD undefined: tag count exceeds collection size");
  const std::uint64_t ftu = stats.pair(t, u);
  if (ftu == 0) return std::numeric_limits<double>::infinity();

  const double lt = std::log(static_cast<double>(ft));
  const double lu = std::log(static_cast<double>(fu));
  const double ltu = std::log(static_cast<double>(ftu));
  const double numer = std::max(0.0, std::max(lt, lu) - ltu);
  const double denom = std::log(static_cast<double>(stats.total())) -
                       std::min(lt, lu);
  if (numer == 0.0) return 0.0;
  // Both tags annotate the whole collection but disagree on the pair count.
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return numer / denom;
}

/// Flickr-context style similarity in [0, 1]: exp(-NGD).
inline double fcs(const CooccurrenceStats& stats, std::string_view t,
                  std::string_view u) {
  return std::exp(-ngd(stats, t, u));
}

/// Dense symmetric tag-to-tag similarity over a vocabulary.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;

  /// Identity-like matrix: 1 on the diagonal, `off` elsewhere.
  explicit SimilarityMatrix(std::size_t n, double off = 0.0)
      : n_(n), values_(n * n, off) {
    for (std::size_t i = 0; i < n; ++i) values_[i * n + i] = 1.0;
  }

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const {
    return values_[i * n_ + j];
  }
  void set(std::size_t i, std::size_t j, double v) {
    values_[i * n_ + j] = v;
    values_[j * n_ + i] = v;
  }

  /// Tags that were absent from the statistics (similarity 0 to all others).
  const std::vector<std::string>& missing() const noexcept { return missing_; }
  void add_missing(std::string tag) { missing_.push_back(std::move(tag)); }

  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
  std::vector<std::string> missing_;
};

inline SimilarityMatrix similarity_matrix(const CooccurrenceStats& stats,
                                          const Vocabulary& vocab) {
  const std::size_t n = vocab.size();
  SimilarityMatrix sim(n);
  std::vector<bool> usable(n);
  for (std::size_t i = 0; i < n; ++i) {
    usable[i] = stats.single(vocab.tag(i)) > 0;
    if (!usable[i]) sim.add_missing(vocab.tag(i));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!usable[i]) continue;
    for (std::size_t j = i + 1; j < n; ++j)
      if (usable[j]) sim.set(i, j, fcs(stats, vocab.tag(i), vocab.tag(j)));
  }
  return sim;
}

}  // namespace adaptk
