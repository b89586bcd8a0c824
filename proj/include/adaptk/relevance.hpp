#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adaptk/error.hpp"
#include "adaptk/similarity.hpp"

// Weak-supervision relevance scores used to rank candidate positive examples
// for a tag: search-engine result positions, click counts, and tag context.

namespace adaptk {

enum class Engine { google, yahoo, bing };

inline std::string_view to_string(Engine e) {
  switch (e) {
    case Engine::google: return "google";
    case Engine::yahoo: return "yahoo";
    case Engine::bing: return "bing";
  }
  return "unknown";
}

struct EngineWeights {
  double google = 1.0;
  double yahoo = 0.5;
  double bing = 0.5;

  double operator[](Engine e) const {
    switch (e) {
      case Engine::google: return google;
      case Engine::yahoo: return yahoo;
      case Engine::bing: return bing;
    }
    return 0.0;
  }
};

struct SearchHit {
  std::string query;
  std::uint32_t rank = 1;  // 1-based result position
  Engine engine = Engine::google;
};

struct SearchRecord {
  std::string image;
  std::vector<SearchHit> hits;
};

struct ClickRecord {
  std::string image;
  std::string query;
  std::uint64_t clicks = 0;
};

struct TaggedImage {
  std::string image;
  std::vector<std::string> tags;
};

/// Lower-cased copy with surrounding whitespace removed.
inline std::string normalize_term(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  std::string out(s);
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline bool same_term(std::string_view a, std::string_view b) {
  return normalize_term(a) == normalize_term(b);
}

/// sum over hits whose query matches `tag` of w(engine) / sqrt(rank).
inline double search_relevance(const SearchRecord& record, std::string_view tag,
                               const EngineWeights& weights = {}) {
  const std::string key = normalize_term(tag);
  double score = 0.0;
  for (const auto& h : record.hits) {
    if (h.rank < 1)
      throw Error(ErrorKind::invalid_argument, "search rank must be >= 1");
    if (normalize_term(h.query) == key)
      score += weights[h.engine] / std::sqrt(static_cast<double>(h.rank));
  }
  return score;
}

inline double click_relevance(const ClickRecord& record, std::string_view tag) {
  return same_term(record.query, tag) ? static_cast<double>(record.clicks) : 0.0;
}

/// Mean similarity of `tag` to the image's other user tags; 0 when it is the
/// only tag.
inline double semantic_field(const TaggedImage& image, std::string_view tag,
                             const CooccurrenceStats& stats) {
  if (std::find(image.tags.begin(), image.tags.end(), tag) == image.tags.end())
    throw Error(ErrorKind::not_found, "tag '" + std::string(tag) +
                                          "' is not a user tag of image '" +
                                          image.image + "'");
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& u : image.tags) {
    if (u == tag) continue;
    acc += fcs(stats, tag, u);
    ++n;
  }
  return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

struct ScoredImage {
  std::string image;
  double relevance = 0.0;
};

struct TopPositives {
  std::vector<ScoredImage> images;
  bool short_list = false;  // fewer candidates than requested
};

/// Highest-relevance images first; ties broken by ascending image id.
inline TopPositives top_positives(std::vector<ScoredImage> scored,
                                  std::size_t n = 1000) {
  if (n < 1) throw Error(ErrorKind::invalid_argument, "n must be >= 1");
  auto before = [](const ScoredImage& a, const ScoredImage& b) {
    if (a.relevance != b.relevance) return a.relevance > b.relevance;
    return a.image < b.image;
  };
  TopPositives out;
  out.short_list = scored.size() < n;
  const std::size_t keep = std::min(n, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(),
                    before);
  scored.resize(keep);
  out.images = std::move(scored);
  return out;
}

}  // namespace adaptk
