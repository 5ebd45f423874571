#pragma once

// Hand-rolled random instance generators for property tests.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "toolrank/library.hpp"
#include "toolrank/rerank.hpp"
#include "toolrank/retrieval.hpp"
#include "toolrank/scoring.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

/// Value on a coarse grid in [lo, hi] so that ties and threshold hits occur.
inline double grid_value(Rng& rng, double lo, double hi, std::size_t steps) {
  const std::size_t s = uniform(rng, 0, steps);
  return lo + (hi - lo) * static_cast<double>(s) / static_cast<double>(steps);
}

inline std::string padded(const char* prefix, std::size_t i) {
  std::string digits = std::to_string(i);
  while (digits.size() < 3) digits.insert(digits.begin(), '0');
  return prefix + digits;
}

/// Random library: `tools` tools with 1..max_apis APIs each, random seen flags.
inline toolrank::ToolLibrary library(Rng& rng, std::size_t tools, std::size_t max_apis, double seen_rate = 0.5) {
  std::vector<toolrank::Tool> ts;
  std::vector<toolrank::ApiDoc> apis;
  std::vector<std::string> seen;
  std::size_t next_api = 0;
  for (std::size_t t = 0; t < tools; ++t) {
    toolrank::Tool tool{padded("t", t), "Tool" + std::to_string(t), "cat" + std::to_string(t % 3), {}};
    const std::size_t count = uniform(rng, 1, max_apis);
    for (std::size_t a = 0; a < count; ++a) {
      const std::string id = padded("a", next_api++);
      tool.api_ids.push_back(id);
      apis.push_back({id, tool.tool_id, "call_" + id, "Does thing " + id + ".", ""});
    }
    if (coin(rng, seen_rate)) seen.push_back(tool.tool_id);
    ts.push_back(std::move(tool));
  }
  return toolrank::ToolLibrary::build(std::move(ts), std::move(apis), std::move(seen));
}

inline std::vector<std::string> api_ids(const toolrank::ToolLibrary& lib) {
  std::vector<std::string> ids;
  for (const auto& [id, api] : lib.apis()) ids.push_back(id);
  return ids;
}

/// Random coarse list of `length` distinct library APIs with ranks 1..length.
inline std::vector<toolrank::Candidate> coarse_list(Rng& rng, const toolrank::ToolLibrary& lib, std::size_t length) {
  auto ids = api_ids(lib);
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(std::min(length, ids.size()));
  std::vector<toolrank::Candidate> out;
  for (std::size_t i = 0; i < ids.size(); ++i)
    out.push_back({ids[i], 1.0 - 0.01 * static_cast<double>(i), i + 1});
  return out;
}

/// Fixed per-API scores; `table` entries missing from the map score `fallback`.
class TableScorer final : public toolrank::RelevanceScorer {
 public:
  explicit TableScorer(std::map<std::string, double, std::less<>> table, double fallback = 0.0)
      : table_(std::move(table)), fallback_(fallback) {}
  double score(const toolrank::ScoreRequest& request) const override {
    auto it = table_.find(request.api_id);
    return it == table_.end() ? fallback_ : it->second;
  }

 private:
  std::map<std::string, double, std::less<>> table_;
  double fallback_;
};

/// Discretized per-API scores for every library API.
inline std::map<std::string, double, std::less<>> score_table(Rng& rng, const toolrank::ToolLibrary& lib,
                                                              std::size_t steps = 20) {
  std::map<std::string, double, std::less<>> table;
  for (const auto& [id, api] : lib.apis()) table[id] = grid_value(rng, 0.0, 1.0, steps);
  return table;
}

/// R list: a random subset of the library scored by `table`, pre-rerank ranks
/// a random permutation of 1..l, sorted by the reranking order.
inline std::vector<toolrank::RerankedItem> reranked_list(Rng& rng, const toolrank::ToolLibrary& lib,
                                                         const std::map<std::string, double, std::less<>>& table,
                                                         std::size_t length) {
  auto ids = api_ids(lib);
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(std::min(length, ids.size()));
  std::vector<std::size_t> ranks(ids.size());
  std::iota(ranks.begin(), ranks.end(), std::size_t{1});
  std::shuffle(ranks.begin(), ranks.end(), rng);
  std::vector<toolrank::RerankedItem> out;
  for (std::size_t i = 0; i < ids.size(); ++i)
    out.push_back({ids[i], table.at(ids[i]), toolrank::Origin::truncated_pool, ranks[i]});
  std::sort(out.begin(), out.end(), toolrank::rerank_order);
  return out;
}

/// Sparse random symmetric similarities on a 0.1 grid in [-1, 1].
inline toolrank::MatrixDocSimilarity similarity(Rng& rng, const std::vector<std::string>& ids, double density) {
  toolrank::MatrixDocSimilarity m;
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j)
      if (coin(rng, density)) m.put(ids[i], ids[j], grid_value(rng, -1.0, 1.0, 20));
  return m;
}

/// Random undirected edge list over `nodes` nodes.
inline std::vector<std::pair<std::size_t, std::size_t>> edges(Rng& rng, std::size_t nodes, double density) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < nodes; ++i)
    for (std::size_t j = i + 1; j < nodes; ++j)
      if (coin(rng, density)) out.emplace_back(i, j);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

/// Random ranking of `universe` ids plus a nonempty gold subset.
struct RankingCase {
  std::vector<std::string> ranked;
  std::vector<std::string> gold;
};

inline RankingCase ranking(Rng& rng, std::size_t universe) {
  RankingCase c;
  for (std::size_t i = 0; i < universe; ++i) c.ranked.push_back(padded("d", i));
  std::shuffle(c.ranked.begin(), c.ranked.end(), rng);
  std::vector<std::string> pool = c.ranked;
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(uniform(rng, 1, std::min<std::size_t>(universe, 8)));
  std::sort(pool.begin(), pool.end());
  c.gold = pool;
  return c;
}

}  // namespace gen
