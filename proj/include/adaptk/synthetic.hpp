#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "adaptk/core.hpp"
#include "adaptk/error.hpp"
#include "adaptk/similarity.hpp"

namespace adaptk {

/// Parameters of the synthetic annotation benchmark.
///
/// Each image draws a uniform number of relevant tags from the whole
/// vocabulary, so relevant tags are equally likely to be seen or novel. This
/// is the operating condition the adaptive method relies on; real data only
/// approximates it.
struct SyntheticSpec {
  std::size_t n_images = 2000;   // evaluation images, fully labelled
  std::size_t n_train = 1000;    // training images, labelled on seen tags
  std::size_t n_seen = 107;
  std::size_t n_novel = 100;
  std::size_t min_relevant = 1;
  std::size_t max_relevant = 20;
  double signal = 1.0;           // score offset of a relevant tag
  double noise_std = 0.3;
  std::size_t n_collection = 20000;  // items behind the co-occurrence counts

  void validate() const {
    const std::size_t n = n_seen + n_novel;
    if (n_seen < 1 || n == 0)
      throw Error(ErrorKind::invalid_argument, "need at least one seen tag");
    if (min_relevant < 1 || min_relevant > max_relevant || max_relevant > n)
      throw Error(ErrorKind::invalid_argument,
                  "relevant-count range must satisfy 1 <= min <= max <= |V|");
    if (!(noise_std >= 0.0))
      throw Error(ErrorKind::invalid_argument, "noise_std must be >= 0");
    if (n_collection < 2)
      throw Error(ErrorKind::invalid_argument, "n_collection must be >= 2");
  }
};

struct SyntheticData {
  Vocabulary vocab;
  ScoreTable train_scores;
  GroundTruth train_truth;  // seen tags only
  ScoreTable test_scores;
  GroundTruth test_truth;   // every tag
  CooccurrenceStats cooccurrence;
};

namespace detail {

inline std::string numbered(const char* prefix, std::size_t i, int width) {
  std::string digits = std::to_string(i);
  if (digits.size() < static_cast<std::size_t>(width))
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return prefix + digits;
}

// Distinct relevant tag columns for one item, ascending.
inline std::vector<std::size_t> draw_relevant(std::mt19937_64& rng,
                                              std::size_t n_tags,
                                              const SyntheticSpec& spec,
                                              std::vector<std::size_t>& perm) {
  std::uniform_int_distribution<std::size_t> count(spec.min_relevant,
                                                   spec.max_relevant);
  const std::size_t c = count(rng);
  // Partial Fisher-Yates over a persistent permutation.
  for (std::size_t k = 0; k < c; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, n_tags - 1);
    std::swap(perm[k], perm[pick(rng)]);
  }
  std::vector<std::size_t> out(perm.begin(), perm.begin() + c);
  std::sort(out.begin(), out.end());
  return out;
}

inline std::mt19937_64 stream(std::uint64_t seed, std::uint32_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), id};
  return std::mt19937_64(seq);
}

}  // namespace detail

/// Deterministic benchmark for a given seed: vocabulary, labelled training
/// and evaluation score tables, and co-occurrence counts built from a
/// separate collection drawn under the same label model.
inline SyntheticData generate_synthetic(const SyntheticSpec& spec,
                                        std::uint64_t seed) {
  spec.validate();
  const std::size_t n_tags = spec.n_seen + spec.n_novel;

  std::vector<std::pair<std::string, Partition>> entries;
  for (std::size_t i = 0; i < spec.n_seen; ++i)
    entries.emplace_back(detail::numbered("s", i, 3), Partition::seen);
  for (std::size_t i = 0; i < spec.n_novel; ++i)
    entries.emplace_back(detail::numbered("n", i, 3), Partition::novel);
  SyntheticData data;
  data.vocab = Vocabulary(std::move(entries));
  const Vocabulary& vocab = data.vocab;

  std::vector<std::size_t> perm(n_tags);
  auto make_split = [&](const char* prefix, std::size_t n_images,
                        std::uint32_t stream_id, bool seen_only,
                        ScoreTable& scores, GroundTruth& truth) {
    auto rng = detail::stream(seed, stream_id);
    std::iota(perm.begin(), perm.end(), 0);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<std::string> images;
    std::vector<double> values(n_images * n_tags);
    std::vector<Label> labels;
    std::vector<char> relevant(n_tags);
    for (std::size_t i = 0; i < n_images; ++i) {
      images.push_back(detail::numbered(prefix, i, 5));
      std::fill(relevant.begin(), relevant.end(), 0);
      for (std::size_t t : detail::draw_relevant(rng, n_tags, spec, perm))
        relevant[t] = 1;
      for (std::size_t t = 0; t < n_tags; ++t) {
        values[i * n_tags + t] =
            spec.signal * relevant[t] + spec.noise_std * noise(rng);
        if (!seen_only || vocab.is_seen(t))
          labels.push_back({images.back(), vocab.tag(t), relevant[t] != 0});
      }
    }
    scores = ScoreTable(std::move(images), vocab, std::move(values));
    std::vector<std::string> coverage;
    for (std::size_t t = 0; t < n_tags; ++t)
      if (!seen_only || vocab.is_seen(t)) coverage.push_back(vocab.tag(t));
    truth = GroundTruth(std::move(labels), std::move(coverage));
  };
  make_split("train_", spec.n_train, 1, true, data.train_scores,
             data.train_truth);
  make_split("test_", spec.n_images, 2, false, data.test_scores,
             data.test_truth);

  // Co-occurrence counts over an independent collection.
  auto rng = detail::stream(seed, 3);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::uint64_t> single(n_tags, 0);
  std::vector<std::uint64_t> pair(n_tags * n_tags, 0);
  for (std::size_t item = 0; item < spec.n_collection; ++item) {
    const auto rel = detail::draw_relevant(rng, n_tags, spec, perm);
    for (std::size_t a = 0; a < rel.size(); ++a) {
      ++single[rel[a]];
      for (std::size_t b = a + 1; b < rel.size(); ++b)
        ++pair[rel[a] * n_tags + rel[b]];
    }
  }
  std::map<std::string, std::uint64_t, std::less<>> singles;
  std::map<CooccurrenceStats::PairKey, std::uint64_t> pairs;
  for (std::size_t a = 0; a < n_tags; ++a) {
    if (single[a] > 0) singles.emplace(vocab.tag(a), single[a]);
    for (std::size_t b = a + 1; b < n_tags; ++b)
      if (const auto n = pair[a * n_tags + b]; n > 0)
        pairs.emplace(CooccurrenceStats::PairKey(vocab.tag(a), vocab.tag(b)), n);
  }
  data.cooccurrence = CooccurrenceStats(spec.n_collection, std::move(singles), pairs);
  return data;
}

}  // namespace adaptk
