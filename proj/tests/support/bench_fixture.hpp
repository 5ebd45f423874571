#pragma once

// A generated benchmark together with the engine components that run on it.

#include <cstdint>
#include <memory>
#include <string>

#include "toolrank/embedding.hpp"
#include "toolrank/pipeline.hpp"
#include "toolrank/rerank.hpp"
#include "toolrank/scoring.hpp"
#include "toolrank/synth.hpp"

namespace fixture {

struct Bench {
  toolrank::SynthBenchmark data;
  std::unique_ptr<toolrank::DenseRetriever> dense;
  toolrank::LexicalOverlapScorer lexical;
  std::unique_ptr<toolrank::OracleScorer> oracle;
  toolrank::HeuristicClassifier heuristic;
  std::unique_ptr<toolrank::EmbeddingDocSimilarity> doc_sim;

  explicit Bench(const toolrank::SynthSpec& spec, double oracle_noise = 0.3)
      : data(toolrank::generate_synthetic_benchmark(spec)) {
    dense = std::make_unique<toolrank::DenseRetriever>(data.embeddings, data.library);
    auto all = data.records;
    all.insert(all.end(), data.dev_records.begin(), data.dev_records.end());
    oracle = std::make_unique<toolrank::OracleScorer>(toolrank::OracleScorer::from_records(all, oracle_noise, spec.seed));
    doc_sim = std::make_unique<toolrank::EmbeddingDocSimilarity>(data.embeddings);
  }

  toolrank::PipelineComponents components(bool use_oracle_scorer = false) const {
    toolrank::PipelineComponents c;
    c.library = &data.library;
    c.retriever = dense.get();
    c.scorer = use_oracle_scorer ? static_cast<const toolrank::RelevanceScorer*>(oracle.get()) : &lexical;
    c.classifier = &heuristic;
    c.doc_sim = doc_sim.get();
    return c;
  }
};

/// Six subsets of `per_subset` queries each, on the default 100-tool library.
inline toolrank::SynthSpec spec(std::uint64_t seed, std::size_t per_subset, std::size_t dev = 0,
                                std::size_t gold_rank_limit = 0) {
  toolrank::SynthSpec s;
  s.seed = seed;
  for (auto& [label, count] : s.queries_per_subset) count = per_subset;
  s.dev_queries = dev;
  s.gold_rank_limit = gold_rank_limit;
  return s;
}

}  // namespace fixture
