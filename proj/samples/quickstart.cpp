// Generates a small benchmark, learns seen-tag cutoffs, and compares the six
// selection strategies on held-out images.

#include <iostream>

#include "adaptk/adaptk.hpp"
#include "adaptk/report.hpp"

int main() {
  using namespace adaptk;

  SyntheticSpec spec;
  spec.n_images = 500;
  spec.n_train = 500;
  const SyntheticData data = generate_synthetic(spec, /*seed=*/7);

  const ThresholdModel model =
      learn_all_thresholds(data.train_scores, data.train_truth, data.vocab);
  const SimilarityMatrix sim = similarity_matrix(data.cooccurrence, data.vocab);

  // One image, adaptive selection with provenance.
  const SelectionRow row =
      select_adaptive(data.test_scores, 0, data.vocab, model, &sim, AdaptiveConfig{});
  std::cout << row.image << ":";
  for (const auto& t : row.tags)
    std::cout << ' ' << data.vocab.tag(t.tag) << '(' << to_string(t.provenance) << ')';
  std::cout << "\n\n";

  const auto strategies = standard_strategies();
  const Comparison c = compare(strategies, data.test_scores, data.test_truth,
                               data.vocab, &model, &sim);
  print_table(std::cout, c);
}
