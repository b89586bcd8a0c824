#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "adaptk/relevance.hpp"

using namespace adaptk;

TEST(SearchRelevance, NoMatchIsZero) {
  SearchRecord r{"img", {{"cat", 1, Engine::google}}};
  EXPECT_EQ(search_relevance(r, "dog"), 0.0);
  EXPECT_EQ(search_relevance(SearchRecord{"img", {}}, "dog"), 0.0);
}

TEST(SearchRelevance, WorkedExamples) {
  SearchRecord one{"img", {{"dog", 1, Engine::google}}};
  EXPECT_EQ(search_relevance(one, "dog"), 1.0);
  SearchRecord two{"img", {{"dog", 1, Engine::google}, {"dog", 4, Engine::yahoo}}};
  EXPECT_EQ(search_relevance(two, "dog"), 1.25);
  SearchRecord bing{"img", {{"dog", 16, Engine::bing}}};
  EXPECT_EQ(search_relevance(bing, "dog"), 0.125);
  EngineWeights w{2.0, 0.0, 0.0};
  EXPECT_EQ(search_relevance(two, "dog", w), 2.0);
}

TEST(SearchRelevance, QueryNormalization) {
  SearchRecord r{"img", {{" Dog ", 1, Engine::google}}};
  EXPECT_EQ(search_relevance(r, "dog"), 1.0);
}

TEST(SearchRelevance, AdditiveAndRankMonotone) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::uint32_t> rank(1, 1000);
  std::uniform_int_distribution<int> eng(0, 2), q(0, 2);
  const char* queries[] = {"dog", "cat", "Dog"};
  for (int rep = 0; rep < 500; ++rep) {
    SearchRecord a{"x", {}}, b{"x", {}};
    for (int i = 0; i < 5; ++i) a.hits.push_back({queries[q(rng)], rank(rng), Engine(eng(rng))});
    for (int i = 0; i < 4; ++i) b.hits.push_back({queries[q(rng)], rank(rng), Engine(eng(rng))});
    SearchRecord ab = a;
    ab.hits.insert(ab.hits.end(), b.hits.begin(), b.hits.end());
    ASSERT_DOUBLE_EQ(search_relevance(ab, "dog"),
                     search_relevance(a, "dog") + search_relevance(b, "dog"));
  }
  for (std::uint32_t r = 1; r < 200; ++r)
    ASSERT_GT(search_relevance({"x", {{"dog", r, Engine::bing}}}, "dog"),
              search_relevance({"x", {{"dog", r + 1, Engine::bing}}}, "dog"));
}

TEST(ClickRelevance, MatchAndNormalization) {
  EXPECT_EQ(click_relevance({"i", "dog", 37}, "dog"), 37.0);
  EXPECT_EQ(click_relevance({"i", "cat", 37}, "dog"), 0.0);
  EXPECT_EQ(normalize_term("  Dog "), "dog");
  EXPECT_EQ(click_relevance({"i", "  Dog ", 5}, "dog"), 5.0);
  EXPECT_EQ(click_relevance({"i", "hot dog", 5}, "dog"), 0.0);
}

namespace {

CooccurrenceStats field_stats() {
  return CooccurrenceStats(
      10000, {{"t", 100}, {"u", 100}, {"v", 400}, {"w", 10}},
      {{{"t", "u"}, 100}, {{"t", "v"}, 40}, {{"t", "w"}, 0}, {{"u", "v"}, 20}});
}

}  // namespace

TEST(SemanticField, SingleNeighbourAndAlone) {
  auto s = field_stats();
  EXPECT_EQ(semantic_field({"img", {"t", "u"}}, "t", s), fcs(s, "t", "u"));
  EXPECT_EQ(semantic_field({"img", {"t", "u"}}, "t", s), 1.0);
  EXPECT_EQ(semantic_field({"img", {"t"}}, "t", s), 0.0);
  EXPECT_EQ(semantic_field({"img", {"t", "w"}}, "t", s), 0.0);
  EXPECT_THROW(semantic_field({"img", {"u"}}, "t", s), Error);
}

TEST(SemanticField, MeanOfPairs) {
  auto s = field_stats();
  const double expect = (fcs(s, "t", "u") + fcs(s, "t", "v")) / 2.0;
  const double got = semantic_field({"img", {"t", "u", "v"}}, "t", s);
  EXPECT_DOUBLE_EQ(got, expect);
  EXPECT_GE(got, 0.0);
  EXPECT_LE(got, 1.0);
}

TEST(TopPositives, ShortListAndArgmax) {
  std::vector<ScoredImage> s{{"b", 1.0}, {"a", 3.0}, {"c", 2.0}};
  auto all = top_positives(s, 10);
  EXPECT_TRUE(all.short_list);
  ASSERT_EQ(all.images.size(), 3u);
  EXPECT_EQ(all.images[0].image, "a");
  auto one = top_positives(s, 1);
  EXPECT_FALSE(one.short_list);
  ASSERT_EQ(one.images.size(), 1u);
  EXPECT_EQ(one.images[0].image, "a");
  EXPECT_THROW(top_positives(s, 0), Error);
}

TEST(TopPositives, MatchesSortOraclePrefix) {
  std::mt19937_64 rng(55);
  std::uniform_int_distribution<int> score(0, 300);  // many ties
  std::vector<ScoredImage> s;
  for (int i = 0; i < 5000; ++i)
    s.push_back({"img" + std::to_string(i), score(rng) / 7.0});
  auto sorted = s;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return std::make_pair(-a.relevance, a.image) < std::make_pair(-b.relevance, b.image);
  });
  auto top = top_positives(s, 1000);
  ASSERT_EQ(top.images.size(), 1000u);
  EXPECT_FALSE(top.short_list);
  for (std::size_t i = 0; i < 1000; ++i) ASSERT_EQ(top.images[i].image, sorted[i].image);
}
