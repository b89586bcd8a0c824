#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "adaptk/error.hpp"

namespace adaptk {

enum class Partition { seen, novel };

inline std::string_view to_string(Partition p) {
  return p == Partition::seen ? "seen" : "novel";
}

namespace detail {

inline bool valid_identifier(std::string_view s) {
  return !s.empty() && s.find_first_of("\t\n\r") == std::string_view::npos;
}

}  // namespace detail

/// Ordered tag list split into disjoint seen/novel subsets.
///
/// Column indices everywhere in the library refer to positions in this list.
class Vocabulary {
 public:
  Vocabulary() = default;

  explicit Vocabulary(std::vector<std::pair<std::string, Partition>> entries) {
    tags_.reserve(entries.size());
    partition_.reserve(entries.size());
    for (auto& [tag, part] : entries) {
      if (!detail::valid_identifier(tag))
        throw Error(ErrorKind::invalid_argument,
                    "invalid tag identifier '" + tag + "'");
      const std::size_t idx = tags_.size();
      if (!index_.emplace(tag, idx).second)
        throw Error(ErrorKind::invalid_argument, "duplicate tag '" + tag + "'");
      tags_.push_back(std::move(tag));
      partition_.push_back(part);
      (part == Partition::seen ? seen_ : novel_).push_back(idx);
    }
  }

  std::size_t size() const noexcept { return tags_.size(); }
  bool empty() const noexcept { return tags_.empty(); }

  const std::vector<std::string>& tags() const noexcept { return tags_; }
  const std::string& tag(std::size_t i) const { return tags_.at(i); }
  Partition partition(std::size_t i) const { return partition_.at(i); }
  bool is_seen(std::size_t i) const { return partition(i) == Partition::seen; }

  /// Column indices of seen tags, in vocabulary order.
  const std::vector<std::size_t>& seen() const noexcept { return seen_; }
  /// Column indices of novel tags, in vocabulary order.
  const std::vector<std::size_t>& novel() const noexcept { return novel_; }

  std::optional<std::size_t> find(std::string_view tag) const {
    auto it = index_.find(tag);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(std::string_view tag) const {
    if (auto i = find(tag)) return *i;
    throw Error(ErrorKind::not_found,
                "unknown tag '" + std::string(tag) + "'");
  }

  bool contains(std::string_view tag) const { return find(tag).has_value(); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tags_ == b.tags_ && a.partition_ == b.partition_;
  }

 private:
  std::vector<std::string> tags_;
  std::vector<Partition> partition_;
  std::vector<std::size_t> seen_;
  std::vector<std::size_t> novel_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// Dense image x tag relevance matrix, row-major.
///
/// Entries are not required to be finite at construction so that
/// validate_inputs() can report offending cells; ranking and selection
/// reject non-finite rows.
class ScoreTable {
 public:
  ScoreTable() = default;

  ScoreTable(std::vector<std::string> images, std::vector<std::string> tags,
             std::vector<double> values)
      : images_(std::move(images)),
        tags_(std::move(tags)),
        values_(std::move(values)) {
    if (values_.size() != images_.size() * tags_.size())
      throw Error(ErrorKind::invalid_argument,
                  "score matrix has " + std::to_string(values_.size()) +
                      " entries, expected " +
                      std::to_string(images_.size() * tags_.size()));
    for (std::size_t i = 0; i < images_.size(); ++i) {
      if (!detail::valid_identifier(images_[i]))
        throw Error(ErrorKind::invalid_argument,
                    "invalid image identifier '" + images_[i] + "'");
      if (!image_index_.emplace(images_[i], i).second)
        throw Error(ErrorKind::invalid_argument,
                    "duplicate image '" + images_[i] + "'");
    }
    std::map<std::string_view, std::size_t> seen_tags;
    for (std::size_t j = 0; j < tags_.size(); ++j)
      if (!seen_tags.emplace(tags_[j], j).second)
        throw Error(ErrorKind::invalid_argument,
                    "duplicate tag column '" + tags_[j] + "'");
    lex_rank_.resize(tags_.size());
    std::size_t r = 0;
    for (const auto& [name, j] : seen_tags) lex_rank_[j] = r++;
  }

  /// Table whose columns follow the vocabulary order.
  ScoreTable(std::vector<std::string> images, const Vocabulary& vocab,
             std::vector<double> values)
      : ScoreTable(std::move(images), vocab.tags(), std::move(values)) {}

  std::size_t num_images() const noexcept { return images_.size(); }
  std::size_t num_tags() const noexcept { return tags_.size(); }
  bool empty() const noexcept { return images_.empty(); }

  const std::vector<std::string>& images() const noexcept { return images_; }
  const std::vector<std::string>& tags() const noexcept { return tags_; }
  const std::vector<double>& values() const noexcept { return values_; }

  std::span<const double> row(std::size_t i) const {
    if (i >= images_.size())
      throw Error(ErrorKind::not_found,
                  "row " + std::to_string(i) + " out of range");
    return {values_.data() + i * tags_.size(), tags_.size()};
  }

  double at(std::size_t image, std::size_t tag) const {
    return values_.at(image * tags_.size() + tag);
  }

  std::optional<std::size_t> find_image(std::string_view image) const {
    auto it = image_index_.find(image);
    if (it == image_index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t image_index(std::string_view image) const {
    if (auto i = find_image(image)) return *i;
    throw Error(ErrorKind::not_found,
                "unknown image '" + std::string(image) + "'");
  }

  /// Position of each column in ascending lexicographic tag order.
  const std::vector<std::size_t>& lex_rank() const noexcept {
    return lex_rank_;
  }

  bool columns_match(const Vocabulary& vocab) const {
    return tags_ == vocab.tags();
  }

  friend bool operator==(const ScoreTable& a, const ScoreTable& b) {
    return a.images_ == b.images_ && a.tags_ == b.tags_ &&
           a.values_ == b.values_;
  }

 private:
  std::vector<std::string> images_;
  std::vector<std::string> tags_;
  std::vector<double> values_;
  std::map<std::string, std::size_t, std::less<>> image_index_;
  std::vector<std::size_t> lex_rank_;
};

struct Label {
  std::string image;
  std::string tag;
  bool relevant = false;
};

/// Binary relevance labels over a tag coverage set. Labels may be incomplete:
/// an (image, tag) pair without a label is simply unknown.
class GroundTruth {
 public:
  using TagLabels = std::map<std::string, bool, std::less<>>;

  GroundTruth() = default;

  /// Coverage is the set of tags that appear in the labels.
  explicit GroundTruth(std::vector<Label> labels) {
    std::vector<std::string> cov;
    std::unordered_set<std::string> seen;
    for (const auto& l : labels)
      if (seen.insert(l.tag).second) cov.push_back(l.tag);
    init(std::move(labels), std::move(cov));
  }

  GroundTruth(std::vector<Label> labels, std::vector<std::string> coverage) {
    init(std::move(labels), std::move(coverage));
  }

  const std::vector<std::string>& coverage() const noexcept {
    return coverage_;
  }
  bool covers(std::string_view tag) const {
    return coverage_set_.find(tag) != coverage_set_.end();
  }

  /// Images in first-appearance order.
  const std::vector<std::string>& images() const noexcept { return images_; }
  const std::vector<Label>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }

  const TagLabels* labels_of(std::string_view image) const {
    auto it = by_image_.find(image);
    return it == by_image_.end() ? nullptr : &it->second;
  }

  std::optional<bool> label(std::string_view image, std::string_view tag) const {
    const TagLabels* tl = labels_of(image);
    if (!tl) return std::nullopt;
    auto it = tl->find(tag);
    if (it == tl->end()) return std::nullopt;
    return it->second;
  }

 private:
  void init(std::vector<Label> labels, std::vector<std::string> coverage) {
    for (const auto& l : labels) {
      auto [it, fresh] = by_image_.try_emplace(l.image);
      if (fresh) images_.push_back(l.image);
      if (!it->second.emplace(l.tag, l.relevant).second)
        throw Error(ErrorKind::invalid_argument,
                    "duplicate label for (" + l.image + ", " + l.tag + ")");
    }
    for (const auto& t : coverage)
      if (!coverage_set_.insert(t).second)
        throw Error(ErrorKind::invalid_argument,
                    "duplicate coverage tag '" + t + "'");
    labels_ = std::move(labels);
    coverage_ = std::move(coverage);
  }

  std::vector<Label> labels_;
  std::vector<std::string> coverage_;
  std::set<std::string, std::less<>> coverage_set_;
  std::vector<std::string> images_;
  std::map<std::string, TagLabels, std::less<>> by_image_;
};

enum class Provenance { seen_threshold, novel_topk, fallback, predicted_threshold };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::seen_threshold: return "from_seen_thresholding";
    case Provenance::novel_topk: return "from_novel_topk";
    case Provenance::fallback: return "from_fallback";
    case Provenance::predicted_threshold: return "from_predicted_threshold";
  }
  return "unknown";
}

struct SelectedTag {
  std::size_t tag = 0;  // vocabulary column
  double score = 0.0;
  Provenance provenance = Provenance::fallback;

  friend bool operator==(const SelectedTag&, const SelectedTag&) = default;
};

struct SelectionRow {
  std::string image;
  std::vector<SelectedTag> tags;

  std::vector<std::size_t> tag_indices() const {
    std::vector<std::size_t> out;
    out.reserve(tags.size());
    for (const auto& t : tags) out.push_back(t.tag);
    return out;
  }

  friend bool operator==(const SelectionRow&, const SelectionRow&) = default;
};

struct SelectionResult {
  std::vector<SelectionRow> rows;

  friend bool operator==(const SelectionResult&,
                         const SelectionResult&) = default;
};

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  unknown_tag,
  unknown_image,
  non_finite_score,
  column_mismatch,
  outside_coverage,
  coverage_not_seen,
  duplicate_selection,
};

inline std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::unknown_tag: return "unknown_tag";
    case ViolationKind::unknown_image: return "unknown_image";
    case ViolationKind::non_finite_score: return "non_finite_score";
    case ViolationKind::column_mismatch: return "column_mismatch";
    case ViolationKind::outside_coverage: return "outside_coverage";
    case ViolationKind::coverage_not_seen: return "coverage_not_seen";
    case ViolationKind::duplicate_selection: return "duplicate_selection";
  }
  return "unknown";
}

struct Violation {
  ViolationKind kind;
  std::string image;  // empty when not image-specific
  std::string tag;    // empty when not tag-specific
  std::string message;
};

using ValidationReport = std::vector<Violation>;

struct ValidationOptions {
  // Training labels must only cover seen tags.
  bool training = false;
};

/// Checks a (vocabulary, scores, labels) triple for consistency.
/// An empty report means every invariant holds.
inline ValidationReport validate_inputs(const Vocabulary& vocab,
                                        const ScoreTable& table,
                                        const GroundTruth& truth,
                                        ValidationOptions opts = {}) {
  ValidationReport report;
  auto add = [&](ViolationKind k, std::string image, std::string tag,
                 std::string msg) {
    report.push_back({k, std::move(image), std::move(tag), std::move(msg)});
  };

  bool columns_ok = true;
  for (const auto& t : table.tags())
    if (!vocab.contains(t)) {
      columns_ok = false;
      add(ViolationKind::unknown_tag, "", t,
          "score column '" + t + "' is not in the vocabulary");
    }
  if (columns_ok && !table.columns_match(vocab))
    add(ViolationKind::column_mismatch, "", "",
        "score columns do not follow vocabulary order");

  for (std::size_t i = 0; i < table.num_images(); ++i) {
    auto row = table.row(i);
    for (std::size_t j = 0; j < row.size(); ++j)
      if (!std::isfinite(row[j]))
        add(ViolationKind::non_finite_score, table.images()[i],
            table.tags()[j],
            "non-finite score at (" + table.images()[i] + ", " +
                table.tags()[j] + ")");
  }

  // Each unknown tag is reported once, whether it shows up in the coverage
  // set or in a label.
  std::set<std::string_view> unknown;
  for (const auto& t : truth.coverage()) {
    if (!vocab.contains(t)) {
      if (unknown.insert(t).second)
        add(ViolationKind::unknown_tag, "", t,
            "coverage tag '" + t + "' is not in the vocabulary");
    } else if (opts.training && !vocab.is_seen(vocab.index_of(t))) {
      add(ViolationKind::coverage_not_seen, "", t,
          "training coverage includes novel tag '" + t + "'");
    }
  }

  for (const auto& l : truth.labels()) {
    if (!vocab.contains(l.tag)) {
      if (unknown.insert(l.tag).second)
        add(ViolationKind::unknown_tag, l.image, l.tag,
            "label references unknown tag '" + l.tag + "'");
    } else if (!truth.covers(l.tag)) {
      add(ViolationKind::outside_coverage, l.image, l.tag,
          "label on '" + l.tag + "' lies outside the coverage set");
    }
  }
  std::set<std::string_view> reported;
  for (const auto& img : truth.images())
    if (!table.find_image(img) && reported.insert(img).second)
      add(ViolationKind::unknown_image, img, "",
          "labelled image '" + img + "' has no score row");
  return report;
}

/// Checks that every selection row references vocabulary tags at most once.
inline ValidationReport validate_selection(const Vocabulary& vocab,
                                           const SelectionResult& sel) {
  ValidationReport report;
  for (const auto& row : sel.rows) {
    std::unordered_set<std::size_t> seen;
    for (const auto& t : row.tags) {
      if (t.tag >= vocab.size()) {
        report.push_back({ViolationKind::unknown_tag, row.image, "",
                          "tag index " + std::to_string(t.tag) +
                              " outside vocabulary"});
        continue;
      }
      if (!seen.insert(t.tag).second)
        report.push_back({ViolationKind::duplicate_selection, row.image,
                          vocab.tag(t.tag), "tag selected twice"});
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Ranking

/// Orders columns of a score row by descending score; equal scores are
/// ordered by ascending tag name, given as lexicographic ranks.
inline std::vector<std::size_t> rank_row(std::span<const double> scores,
                                         std::span<const std::size_t> lex_rank) {
  if (scores.size() != lex_rank.size())
    throw Error(ErrorKind::invalid_argument, "rank_row: size mismatch");
  for (double s : scores)
    if (!std::isfinite(s))
      throw Error(ErrorKind::invalid_argument,
                  "cannot rank a row with non-finite scores");
  std::vector<std::size_t> order(scores.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return lex_rank[a] < lex_rank[b];
  });
  return order;
}

/// Restriction of rank_row to a column subset.
inline std::vector<std::size_t> rank_subset(
    std::span<const double> scores, std::span<const std::size_t> lex_rank,
    std::span<const std::size_t> subset) {
  std::vector<std::size_t> order(subset.begin(), subset.end());
  for (std::size_t j : order)
    if (!std::isfinite(scores[j]))
      throw Error(ErrorKind::invalid_argument,
                  "cannot rank a row with non-finite scores");
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return lex_rank[a] < lex_rank[b];
  });
  return order;
}

inline std::vector<std::size_t> rank_tags(const ScoreTable& table,
                                          std::size_t image) {
  return rank_row(table.row(image), table.lex_rank());
}

inline std::vector<std::size_t> rank_tags(const ScoreTable& table,
                                          std::string_view image) {
  return rank_tags(table, table.image_index(image));
}

}  // namespace adaptk
