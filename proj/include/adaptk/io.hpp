#pragma once

// Line-oriented TSV formats. Lines starting with '#' and blank lines are
// ignored on input. Floating-point values are written in the shortest
// decimal form that round-trips.
//
//   vocabulary   tag \t seen|novel
//   scores       image \t tag \t score
//   truth        image \t tag \t 0|1
//   cooccurrence 1 \t tag \t count
//                2 \t tag_a \t tag_b \t count      (tag_a < tag_b)
//                N \t total
//   selections   image \t tag \t score \t provenance
//   thresholds   tag \t tau|NA \t mu \t sigma
//   search       image \t query \t rank \t google|yahoo|bing
//   clicks       image \t query \t clicks
//   user tags    image \t tag

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "adaptk/core.hpp"
#include "adaptk/error.hpp"
#include "adaptk/relevance.hpp"
#include "adaptk/similarity.hpp"
#include "adaptk/thresholds.hpp"

namespace adaptk::io {

/// Shortest round-trip decimal representation.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

class LineReader {
 public:
  LineReader(std::istream& in, std::string source)
      : in_(in), source_(std::move(source)) {}

  // Next data line split on tabs; false at end of input.
  bool next(std::vector<std::string_view>& fields) {
    while (std::getline(in_, line_)) {
      ++number_;
      if (!line_.empty() && line_.back() == '\r') line_.pop_back();
      if (line_.empty() || line_.front() == '#') continue;
      fields.clear();
      std::string_view rest(line_);
      for (;;) {
        auto tab = rest.find('\t');
        fields.push_back(rest.substr(0, tab));
        if (tab == std::string_view::npos) break;
        rest.remove_prefix(tab + 1);
      }
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::parse,
                source_ + ":" + std::to_string(number_) + ": " + msg);
  }

  void expect_fields(const std::vector<std::string_view>& f,
                     std::size_t n) const {
    if (f.size() != n)
      fail("expected " + std::to_string(n) + " tab-separated fields, got " +
           std::to_string(f.size()));
    for (auto s : f)
      if (s.empty()) fail("empty field");
  }

  double to_double(std::string_view s) const {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      fail("malformed number '" + std::string(s) + "'");
    return v;
  }

  std::uint64_t to_uint(std::string_view s) const {
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      fail("malformed count '" + std::string(s) + "'");
    return v;
  }

  std::size_t tag_index(const Vocabulary& vocab, std::string_view tag) const {
    if (auto i = vocab.find(tag)) return *i;
    fail("unknown tag '" + std::string(tag) + "'");
  }

 private:
  std::istream& in_;
  std::string source_;
  std::string line_;
  std::size_t number_ = 0;
};

}  // namespace detail

// --- vocabulary ------------------------------------------------------------

inline Vocabulary read_vocabulary(std::istream& in,
                                  const std::string& source = "vocabulary") {
  detail::LineReader r(in, source);
  std::vector<std::string_view> f;
  std::vector<std::pair<std::string, Partition>> entries;
  std::set<std::string, std::less<>> names;
  while (r.next(f)) {
    r.expect_fields(f, 2);
    Partition p;
    if (f[1] == "seen")
      p = Partition::seen;
    else if (f[1] == "novel")
      p = Partition::novel;
    else
      r.fail("partition must be 'seen' or 'novel'");
    if (!names.emplace(f[0]).second)
      r.fail("duplicate tag '" + std::string(f[0]) + "'");
    entries.emplace_back(std::string(f[0]), p);
  }
  return Vocabulary(std::move(entries));
}

inline void write_vocabulary(std::ostream& out, const Vocabulary& vocab) {
  out << "# tag\tpartition\n";
  for (std::size_t t = 0; t < vocab.size(); ++t)
    out << vocab.tag(t) << '\t' << to_string(vocab.partition(t)) << '\n';
}

// --- scores ----------------------------------------------------------------

/// Reads a dense score table whose columns follow `vocab`. Every
/// (image, tag) cell must appear exactly once.
inline ScoreTable read_scores(std::istream& in, const Vocabulary& vocab,
                              const std::string& source = "scores") {
  detail::LineReader r(in, source);
  std::vector<std::string_view> f;
  std::vector<std::string> images;
  std::map<std::string, std::size_t, std::less<>> image_index;
  std::vector<double> values;
  std::vector<char> filled;
  const std::size_t n = vocab.size();
  while (r.next(f)) {
    r.expect_fields(f, 3);
    const std::size_t t = r.tag_index(vocab, f[1]);
    auto it = image_index.find(f[0]);
    if (it == image_index.end()) {
      it = image_index.emplace(std::string(f[0]), images.size()).first;
      images.emplace_back(f[0]);
      values.resize(values.size() + n, 0.0);
      filled.resize(filled.size() + n, 0);
    }
    const std::size_t cell = it->second * n + t;
    if (filled[cell])
      r.fail("duplicate score for (" + std::string(f[0]) + ", " +
             std::string(f[1]) + ")");
    filled[cell] = 1;
    values[cell] = r.to_double(f[2]);
  }
  for (std::size_t c = 0; c < filled.size(); ++c)
    if (!filled[c])
      throw Error(ErrorKind::parse, source + ": missing score for (" +
                                        images[c / n] + ", " +
                                        vocab.tag(c % n) + ")");
  return ScoreTable(std::move(images), vocab, std::move(values));
}

inline void write_scores(std::ostream& out, const ScoreTable& table) {
  out << "# image\ttag\tscore\n";
  for (std::size_t i = 0; i < table.num_images(); ++i) {
    auto row = table.row(i);
    for (std::size_t t = 0; t < row.size(); ++t)
      out << table.images()[i] << '\t' << table.tags()[t] << '\t'
          << format_double(row[t]) << '\n';
  }
}

// --- ground truth ----------------------------------------------------------

inline GroundTruth read_truth(std::istream& in, const Vocabulary& vocab,
                              const std::string& source = "truth") {
  detail::LineReader r(in, source);
  std::vector<std::string_view> f;
  std::vector<Label> labels;
  std::set<std::pair<std::string, std::string>> keys;
  while (r.next(f)) {
    r.expect_fields(f, 3);
    r.tag_index(vocab, f[1]);
    if (f[2] != "0" && f[2] != "1") r.fail("label must be 0 or 1");
    if (!keys.emplace(std::string(f[0]), std::string(f[1])).second)
      r.fail("duplicate label for (" + std::string(f[0]) + ", " +
             std::string(f[1]) + ")");
    labels.push_back({std::string(f[0]), std::string(f[1]), f[2] == "1"});
  }
  return GroundTruth(std::move(labels));
}

inline void write_truth(std::ostream& out, const GroundTruth& truth) {
  out << "# image\ttag\tlabel\n";
  for (const auto& l : truth.labels())
    out << l.image << '\t' << l.tag << '\t' << (l.relevant ? '1' : '0')
        << '\n';
}

// --- co-occurrence ---------------------------------------------------------

inline CooccurrenceStats read_cooccurrence(std::istream& in,
                                           const std::string& source = "cooccurrence") {
  detail::LineReader r(in, source);
  std::vector<std::string_view> f;
  std::map<std::string, std::uint64_t, std::less<>> single;
  std::map<CooccurrenceStats::PairKey, std::uint64_t> pairs;
  std::optional<std::uint64_t> total;
  while (r.next(f)) {
    if (f.empty()) r.fail("empty line");
    if (f[0] == "1") {
      r.expect_fields(f, 3);
      if (!single.emplace(std::string(f[1]), r.to_uint(f[2])).second)
        r.fail("duplicate count for '" + std::string(f[1]) + "'");
    } else if (f[0] == "2") {
      r.expect_fields(f, 4);
      if (!(f[1] < f[2])) r.fail("pair tags must be in ascending order");
      if (!pairs.emplace(CooccurrenceStats::PairKey(f[1], f[2]), r.to_uint(f[3]))
               .second)
        r.fail("duplicate pair (" + std::string(f[1]) + ", " +
               std::string(f[2]) + ")");
    } else if (f[0] == "N") {
      r.expect_fields(f, 2);
      if (total) r.fail("duplicate total row");
      total = r.to_uint(f[1]);
    } else {
      r.fail("record type must be 1, 2 or N");
    }
  }
  if (!total) throw Error(ErrorKind::parse, source + ": missing N row");
  return CooccurrenceStats(*total, std::move(single), pairs);
}

inline void write_cooccurrence(std::ostream& out, const CooccurrenceStats& s) {
  out << "# 1\ttag\tcount | 2\ttag_a\ttag_b\tcount | N\ttotal\n";
  out << "N\t" << s.total() << '\n';
  for (const auto& [tag, n] : s.singles()) out << "1\t" << tag << '\t' << n << '\n';
  for (const auto& [key, n] : s.pairs())
    out << "2\t" << key.first << '\t' << key.second << '\t' << n << '\n';
}

// --- selections ------------------------------------------------------------

inline Provenance parse_provenance(std::string_view s) {
  for (auto p : {Provenance::seen_threshold, Provenance::novel_topk,
                 Provenance::fallback, Provenance::predicted_threshold})
    if (to_string(p) == s) return p;
  throw Error(ErrorKind::parse, "unknown provenance '" + std::string(s) + "'");
}

/// Rows appear in first-appearance order. Images with an empty selection
/// have no lines and therefore no row.
inline SelectionResult read_selections(std::istream& in, const Vocabulary& vocab,
                                       const std::string& source = "selections") {
  detail::LineReader r(in, source);
  std::vector<std::string_view> f;
  SelectionResult out;
  std::map<std::string, std::size_t, std::less<>> rows;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  while (r.next(f)) {
    r.expect_fields(f, 4);
    const std::size_t t = r.tag_index(vocab, f[1]);
    auto it = rows.find(f[0]);
    if (it == rows.end()) {
      it = rows.emplace(std::string(f[0]), out.rows.size()).first;
      out.rows.push_back({std::string(f[0]), {}});
    }
    if (!seen.emplace(it->second, t).second)
      r.fail("tag '" + std::string(f[1]) + "' selected twice for image '" +
             std::string(f[0]) + "'");
    Provenance p;
    try {
      p = parse_provenance(f[3]);
    } catch (const Error& e) {
      r.fail(e.what());
    }
    out.rows[it->second].tags.push_back({t, r.to_double(f[2]), p});
  }
  return out;
}

inline void write_selections(std::ostream& out, const SelectionResult& sel,
                             const Vocabulary& vocab) {
  out << "# image\ttag\tscore\tprovenance\n";
  for (const auto& row : sel.rows)
    for (const auto& t : row.tags)
      out << row.image << '\t' << vocab.tag(t.tag) << '\t'
          << format_double(t.score) << '\t' << to_string(t.provenance) << '\n';
}

// --- thresholds ------------------------------------------------------------

/// Loads cutoffs and statistics; lsq coefficients are refitted from them.
inline ThresholdModel read_thresholds(std::istream& in, const Vocabulary& vocab,
                                      bool lsq_intercept = false,
                                      const std::string& source = "thresholds") {
  detail::LineReader r(in, source);
  std::vector<std::string_view> f;
  ThresholdModel m;
  m.tau.assign(vocab.size(), std::nullopt);
  m.train_f.assign(vocab.size(), std::nullopt);
  m.stats.mu.assign(vocab.size(), 0.0);
  m.stats.sigma.assign(vocab.size(), 0.0);
  std::vector<char> filled(vocab.size(), 0);
  while (r.next(f)) {
    r.expect_fields(f, 4);
    const std::size_t t = r.tag_index(vocab, f[0]);
    if (filled[t]) r.fail("duplicate tag '" + std::string(f[0]) + "'");
    filled[t] = 1;
    if (f[1] != "NA") {
      if (!vocab.is_seen(t)) r.fail("novel tag '" + std::string(f[0]) + "' has a learned threshold");
      m.tau[t] = r.to_double(f[1]);
    }
    m.stats.mu[t] = r.to_double(f[2]);
    m.stats.sigma[t] = r.to_double(f[3]);
    if (m.stats.sigma[t] < 0.0) r.fail("negative sigma");
  }
  for (std::size_t t = 0; t < vocab.size(); ++t)
    if (!filled[t])
      throw Error(ErrorKind::parse,
                  source + ": no statistics for tag '" + vocab.tag(t) + "'");
  for (std::size_t t : vocab.seen())
    if (!m.tau[t]) m.untrainable.push_back(t);
  try {
    m.lsq = fit_lsq(m, lsq_intercept);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::degenerate) throw;
  }
  return m;
}

inline void write_thresholds(std::ostream& out, const ThresholdModel& m,
                             const Vocabulary& vocab) {
  out << "# tag\ttau\tmu\tsigma\n";
  for (std::size_t t = 0; t < vocab.size(); ++t)
    out << vocab.tag(t) << '\t'
        << (m.has_tau(t) ? format_double(*m.tau[t]) : std::string("NA"))
        << '\t' << format_double(m.stats.mu.at(t)) << '\t'
        << format_double(m.stats.sigma.at(t)) << '\n';
}

// --- weak-supervision records ------------------------------------------------

inline Engine parse_engine(std::string_view s) {
  const std::string n = normalize_term(s);
  if (n == "google") return Engine::google;
  if (n == "yahoo") return Engine::yahoo;
  if (n == "bing") return Engine::bing;
  throw Error(ErrorKind::parse, "unknown engine '" + std::string(s) + "'");
}

/// Groups search hits by image, in first-appearance order.
inline std::vector<SearchRecord> read_search_records(
    std::istream& in, const std::string& source = "search") {
  detail::LineReader r(in, source);
  std::vector<std::string_view> f;
  std::vector<SearchRecord> out;
  std::map<std::string, std::size_t, std::less<>> index;
  while (r.next(f)) {
    r.expect_fields(f, 4);
    const std::uint64_t rank = r.to_uint(f[2]);
    if (rank < 1 || rank > UINT32_MAX) r.fail("rank must be a positive integer");
    Engine e;
    try {
      e = parse_engine(f[3]);
    } catch (const Error& err) {
      r.fail(err.what());
    }
    auto it = index.find(f[0]);
    if (it == index.end()) {
      it = index.emplace(std::string(f[0]), out.size()).first;
      out.push_back({std::string(f[0]), {}});
    }
    out[it->second].hits.push_back(
        {std::string(f[1]), static_cast<std::uint32_t>(rank), e});
  }
  return out;
}

inline std::vector<ClickRecord> read_click_records(
    std::istream& in, const std::string& source = "clicks") {
  detail::LineReader r(in, source);
  std::vector<std::string_view> f;
  std::vector<ClickRecord> out;
  while (r.next(f)) {
    r.expect_fields(f, 3);
    out.push_back({std::string(f[0]), std::string(f[1]), r.to_uint(f[2])});
  }
  return out;
}

inline std::vector<TaggedImage> read_tagged_images(
    std::istream& in, const std::string& source = "user-tags") {
  detail::LineReader r(in, source);
  std::vector<std::string_view> f;
  std::vector<TaggedImage> out;
  std::map<std::string, std::size_t, std::less<>> index;
  std::set<std::pair<std::string, std::string>> seen;
  while (r.next(f)) {
    r.expect_fields(f, 2);
    if (!seen.emplace(std::string(f[0]), std::string(f[1])).second)
      r.fail("duplicate user tag '" + std::string(f[1]) + "'");
    auto it = index.find(f[0]);
    if (it == index.end()) {
      it = index.emplace(std::string(f[0]), out.size()).first;
      out.push_back({std::string(f[0]), {}});
    }
    out[it->second].tags.emplace_back(f[1]);
  }
  return out;
}

// --- files -----------------------------------------------------------------

template <typename Reader>
auto load(const std::string& path, Reader&& reader) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "' for reading");
  return reader(in, path);
}

template <typename Writer>
void save(const std::string& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
  writer(out);
  out.flush();
  if (!out) throw Error(ErrorKind::io, "failed writing '" + path + "'");
}

}  // namespace adaptk::io
