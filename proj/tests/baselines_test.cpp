#include <gtest/gtest.h>

#include <set>

#include "adaptk/baselines.hpp"
#include "adaptk/synthetic.hpp"

using namespace adaptk;

namespace {

struct Bench {
  SyntheticData data;
  ThresholdModel model;
  SimilarityMatrix sim;
};

const Bench& bench() {
  static const Bench b = [] {
    SyntheticSpec spec;
    spec.n_images = 300;
    spec.n_train = 300;
    spec.n_seen = 30;
    spec.n_novel = 25;
    spec.max_relevant = 8;
    spec.n_collection = 2000;
    Bench out{generate_synthetic(spec, 17), {}, SimilarityMatrix(0)};
    out.model = learn_all_thresholds(out.data.train_scores, out.data.train_truth,
                                     out.data.vocab);
    out.sim = similarity_matrix(out.data.cooccurrence, out.data.vocab);
    return out;
  }();
  return b;
}

}  // namespace

TEST(Strategy, NamesRoundTrip) {
  for (const auto& s : standard_strategies())
    EXPECT_EQ(parse_strategy(to_string(s.name)), s.name);
  EXPECT_THROW(parse_strategy("top5"), Error);
  StrategySpec t{StrategyName::top_k, 7, {}};
  EXPECT_EQ(t.label(), "top_7");
  EXPECT_FALSE(t.needs_model());
  EXPECT_EQ(standard_strategies().size(), 6u);
}

TEST(RunStrategy, TopFiveGivesFiveTags) {
  const auto& b = bench();
  StrategySpec s{StrategyName::top_k, 5, {}};
  auto r = run_strategy(s, b.data.test_scores, b.data.vocab, nullptr, nullptr);
  ASSERT_EQ(r.rows.size(), b.data.test_scores.num_images());
  for (const auto& row : r.rows) ASSERT_EQ(row.tags.size(), 5u);
}

TEST(RunStrategy, ModelRequired) {
  const auto& b = bench();
  StrategySpec s{StrategyName::mu_sigma, 5, {}};
  EXPECT_THROW(run_strategy(s, b.data.test_scores, b.data.vocab, nullptr, nullptr),
               Error);
}

TEST(RunStrategy, ConstantColumnNeverSelectedByMuSigma) {
  auto v = Vocabulary({{"a", Partition::seen}, {"b", Partition::novel}});
  ScoreTable t({"i", "j", "k"}, v, {0.3, 1.0, 0.3, 2.0, 0.3, 0.0});
  ThresholdModel m;
  m.tau = {0.1, std::nullopt};
  m.stats = tag_stats(t);
  StrategySpec s{StrategyName::mu_sigma, 5, {}};
  auto r = run_strategy(s, t, v, &m, nullptr);
  for (const auto& row : r.rows)
    for (const auto& tag : row.tags) EXPECT_NE(tag.tag, 0u);
  // Column b has mu = 1, sigma = sqrt(2/3): only image j passes.
  ASSERT_EQ(r.rows[1].tags.size(), 1u);
  EXPECT_EQ(r.rows[1].tags[0].tag, 1u);
  EXPECT_EQ(r.rows[1].tags[0].provenance, Provenance::predicted_threshold);
}

TEST(RunStrategy, HybridSeenPartEqualsAdaptiveThresholdSet) {
  const auto& b = bench();
  const auto& t = b.data.test_scores;
  const auto pool = b.model.trainable_seen(b.data.vocab);
  for (auto name : {StrategyName::hybrid_tau_musigma, StrategyName::hybrid_tau_lsq}) {
    auto hybrid = run_strategy({name, 5, {}}, t, b.data.vocab, &b.model, nullptr);
    auto adaptive =
        run_strategy({StrategyName::adaptive, 5, {}}, t, b.data.vocab, &b.model, nullptr);
    for (std::size_t i = 0; i < t.num_images(); ++i) {
      std::set<std::size_t> hs, as;
      for (const auto& s : hybrid.rows[i].tags)
        if (b.data.vocab.is_seen(s.tag)) {
          hs.insert(s.tag);
          ASSERT_EQ(s.provenance, Provenance::seen_threshold);
        } else {
          ASSERT_EQ(s.provenance, Provenance::predicted_threshold);
        }
      for (std::size_t s : select_by_threshold(t, i, b.model.tau, pool)) as.insert(s);
      ASSERT_EQ(hs, as);
      std::set<std::size_t> adaptive_a;
      for (const auto& s : adaptive.rows[i].tags)
        if (s.provenance == Provenance::seen_threshold) adaptive_a.insert(s.tag);
      ASSERT_EQ(adaptive_a, as);
    }
  }
}

TEST(RunStrategy, AdaptiveRowSizesFollowCountLaw) {
  const auto& b = bench();
  const auto& t = b.data.test_scores;
  auto r = run_strategy({StrategyName::adaptive, 5, {}}, t, b.data.vocab, &b.model, nullptr);
  const auto pool = b.model.trainable_seen(b.data.vocab);
  std::set<std::size_t> sizes;
  for (std::size_t i = 0; i < t.num_images(); ++i) {
    const auto a = select_by_threshold(t, i, b.model.tau, pool).size();
    const auto expect =
        a == 0 ? 5 : a + k_novel(pool.size(), b.data.vocab.novel().size(), a);
    ASSERT_EQ(r.rows[i].tags.size(), expect);
    sizes.insert(expect);
  }
  EXPECT_GT(sizes.size(), 1u);
}

TEST(RunStrategy, RefinedAdaptiveNeedsSimilarity) {
  const auto& b = bench();
  AdaptiveConfig cfg;
  cfg.refine = true;
  StrategySpec s{StrategyName::adaptive, 5, cfg};
  EXPECT_EQ(s.label(), "adaptive_refined");
  EXPECT_THROW(run_strategy(s, b.data.test_scores, b.data.vocab, &b.model, nullptr),
               Error);
  auto r = run_strategy(s, b.data.test_scores, b.data.vocab, &b.model, &b.sim);
  EXPECT_EQ(r.rows.size(), b.data.test_scores.num_images());
}

TEST(Compare, SixRowsShareMap) {
  const auto& b = bench();
  auto specs = standard_strategies();
  auto c = compare(specs, b.data.test_scores, b.data.test_truth, b.data.vocab,
                   &b.model, &b.sim);
  ASSERT_EQ(c.rows.size(), 6u);
  EXPECT_TRUE(c.shared_map);
  for (const auto& r : c.rows) EXPECT_NEAR(r.report.map, c.rows[0].report.map, 1e-12);
  EXPECT_EQ(c.rows[0].name, "top_5");
  EXPECT_EQ(c.rows[0].mean_selected, 5.0);
  EXPECT_EQ(c.rows[5].name, "adaptive");
}

TEST(Compare, SingleAndDuplicatedStrategies) {
  const auto& b = bench();
  std::vector<StrategySpec> one{{StrategyName::adaptive, 5, {}}};
  auto c1 = compare(one, b.data.test_scores, b.data.test_truth, b.data.vocab,
                    &b.model, nullptr);
  ASSERT_EQ(c1.rows.size(), 1u);
  std::vector<StrategySpec> twice{one[0], one[0]};
  auto c2 = compare(twice, b.data.test_scores, b.data.test_truth, b.data.vocab,
                    &b.model, nullptr, {}, 3);
  ASSERT_EQ(c2.rows.size(), 2u);
  EXPECT_EQ(c2.rows[0].report.mf, c2.rows[1].report.mf);
  EXPECT_EQ(c2.rows[0].report.map, c2.rows[1].report.map);
  EXPECT_EQ(c2.rows[0].report.mf, c1.rows[0].report.mf);
}
