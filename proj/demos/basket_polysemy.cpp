// Tracks how the "bread" cell diversifies while reading a handful of
// supermarket baskets. Items carry synthetic base vectors.

#include <iostream>

#include "semcells/semcells.hpp"

int main() {
  using namespace semcells;

  const Corpus corpus = ingest_baskets(SEMCELLS_DEMO_DATA "/baskets.csv");

  ModelConfig config = default_config();
  config.d = 10;
  config.g = 5;
  config.alpha = 0.3;
  config.off_segment_sign = OffSegmentSign::negative;

  const std::vector<std::string> tracked{"bread"};
  const auto result = run_experiment(corpus, EmbeddingTable(config.d),
                                     OrderingSpec{}, config, tracked);

  for (const auto& sample : result.trajectory.samples()) {
    std::cout << sample.step << '\t' << sample.polysemy << '\n';
  }
  std::cout << "decreases: " << result.summary.decrease_count
            << ", drawdown: " << result.summary.max_drawdown << '\n';
}
