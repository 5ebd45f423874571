#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "toolrank/embedding.hpp"
#include "toolrank/library.hpp"

namespace toolrank {

/// Parameters of the seeded synthetic benchmark.
struct SynthSpec {
  std::uint64_t seed = 0;
  std::size_t tools = 100;
  std::size_t apis_per_tool = 5;
  std::size_t categories = 10;
  /// Clusters of near-duplicate tools: a template tool plus clones whose
  /// descriptions differ by a few word swaps.
  std::size_t clusters = 10;
  std::size_t cluster_size = 3;
  double seen_fraction = 0.5;
  /// Share of the unseen tools placed in wholly unseen categories; the rest
  /// are unseen tools inside seen categories.
  double unseen_category_share = 0.8;

  /// Evaluation query counts keyed by subset label (I1-Inst, I2-Inst, I3-Inst,
  /// I1-Tool, I1-Cat, I2-Cat).
  std::map<std::string, std::size_t> queries_per_subset{{"I1-Inst", 10}, {"I2-Inst", 10}, {"I3-Inst", 10},
                                                       {"I1-Tool", 10}, {"I1-Cat", 10}, {"I2-Cat", 10}};
  /// Dev queries, spread round-robin over the same subsets.
  std::size_t dev_queries = 0;

  std::size_t dimension = 64;
  /// Weights of the document embedding mix.
  double category_weight = 0.5;
  double group_weight = 1.3;
  double tool_weight = 0.2;
  double api_weight = 0.8;
  /// Query embedding noise relative to the unit gold centroid.
  double seen_query_noise = 0.2;
  double unseen_query_noise = 4.0;
  /// Pairs of lexical twins: two tools of one category, far apart in
  /// embedding space, whose APIs share wording except for one word each.
  std::size_t twin_pairs = 30;
  /// Correlation of a twin's group direction with its source's.
  double twin_affinity = 0.4;

  /// Words per query phrase copied from the gold description, the chance of
  /// naming the tool topic, and the chance of adding a word the gold API lacks
  /// (the twin's own word when the tool has a twin).
  std::size_t phrase_words = 2;
  double topic_rate = 0.3;
  double distractor_rate = 1.0;

  /// When nonzero, every gold API must rank within this many dense results:
  /// query noise is resampled and shrunk, and a gold set that still cannot be
  /// placed is redrawn.
  std::size_t gold_rank_limit = 0;
};

/// Generated library, queries and embeddings (documents and queries).
struct SynthBenchmark {
  ToolLibrary library;
  std::vector<EvalRecord> records;
  std::vector<EvalRecord> dev_records;
  EmbeddingStore embeddings;

  /// Writes library.jsonl, queries.jsonl, dev_queries.jsonl and embeddings.tsv.
  void save(const std::string& directory) const;
  static SynthBenchmark load(const std::string& directory);
};

/// Deterministic for a fixed spec. Throws ConfigError on an infeasible spec.
SynthBenchmark generate_synthetic_benchmark(const SynthSpec& spec);

/// Subset labels in canonical order and whether each is seen / multi-tool.
struct SubsetKind {
  std::string label;
  bool seen;
  bool multi_tool;
  /// Query tools come from wholly unseen categories.
  bool unseen_category;
  /// Gold tools of multi-tool queries span several categories.
  bool cross_category;
};
const std::vector<SubsetKind>& benchmark_subsets();

}  // namespace toolrank
