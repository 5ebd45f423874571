#pragma once

// Deliberately naive reference implementations used only by tests. They share
// no code with the engine beyond its data types.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "toolrank/library.hpp"
#include "toolrank/rerank.hpp"
#include "toolrank/retrieval.hpp"
#include "toolrank/scoring.hpp"

namespace oracle {

using toolrank::Candidate;
using toolrank::DocSimilarity;
using toolrank::Origin;
using toolrank::QueryRef;
using toolrank::RelevanceScorer;
using toolrank::RerankConfig;
using toolrank::RerankedItem;
using toolrank::ToolLibrary;

// T = [c_i for c_i in C if (seen(c_i) and i <= m_s) or (not seen(c_i) and i <= m_u)]
inline std::vector<Candidate> truncate(const std::vector<Candidate>& coarse, const std::vector<bool>& seen_flags,
                                       std::size_t m_s, std::size_t m_u) {
  std::vector<Candidate> out;
  for (std::size_t idx = 0; idx < coarse.size(); ++idx) {
    const std::size_t i = coarse[idx].coarse_rank;
    if ((seen_flags[idx] && i <= m_s) || (!seen_flags[idx] && i <= m_u)) out.push_back(coarse[idx]);
  }
  return out;
}

// Strict "a before b" under the reranking tie-break, written out longhand.
inline bool before(const RerankedItem& a, const RerankedItem& b) {
  if (a.rerank_score > b.rerank_score) return true;
  if (a.rerank_score < b.rerank_score) return false;
  const bool a_has = a.pre_rerank_rank.has_value();
  const bool b_has = b.pre_rerank_rank.has_value();
  if (a_has && !b_has) return true;
  if (!a_has && b_has) return false;
  if (a_has && b_has && *a.pre_rerank_rank != *b.pre_rerank_rank) return *a.pre_rerank_rank < *b.pre_rerank_rank;
  return a.api_id < b.api_id;
}

// Selection sort: repeatedly take the best remaining item.
inline std::vector<RerankedItem> selection_sorted(std::vector<RerankedItem> items) {
  std::vector<RerankedItem> out;
  while (!items.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < items.size(); ++i)
      if (before(items[i], items[best])) best = i;
    out.push_back(items[best]);
    items.erase(items.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return out;
}

inline bool contains_id(const std::vector<RerankedItem>& list, const std::string& api_id) {
  for (const auto& r : list)
    if (r.api_id == api_id) return true;
  return false;
}

inline bool contains_tool(const std::vector<std::string>& tools, const std::string& tool) {
  for (const auto& t : tools)
    if (t == tool) return true;
  return false;
}

inline bool wants_extension(const ToolLibrary& lib, const std::string& tool, const RerankConfig& config) {
  return lib.is_seen(tool) ? config.extend_seen : config.extend_unseen;
}

// Adds every API of every tool in `tools` to F1 (an API found in F2 moves
// over with its entry), rescores F1 and re-sorts it.
inline void extend(std::vector<RerankedItem>& f1, std::vector<RerankedItem>& f2, const std::vector<std::string>& tools,
                   const QueryRef& q, const ToolLibrary& lib, const RelevanceScorer& scorer) {
  for (const auto& x : tools) {
    for (const auto& api_id : lib.tool(x).api_ids) {
      if (contains_id(f1, api_id)) continue;
      bool moved = false;
      for (std::size_t j = 0; j < f2.size(); ++j) {
        if (f2[j].api_id == api_id) {
          f1.push_back(f2[j]);
          f2.erase(f2.begin() + static_cast<std::ptrdiff_t>(j));
          moved = true;
          break;
        }
      }
      if (!moved) f1.push_back(RerankedItem{api_id, 0.0, Origin::extended_pool, std::nullopt});
    }
  }
  for (auto& r : f1) {
    const auto& api = lib.api(r.api_id);
    r.rerank_score = scorer.score({q, api.api_id, api.document_text});
  }
  f1 = selection_sorted(f1);
}

// Single-tool procedure, one statement per pseudocode line.
inline std::vector<RerankedItem> single(const QueryRef& q, const std::vector<RerankedItem>& R,
                                        const RerankConfig& config, const ToolLibrary& lib,
                                        const RelevanceScorer& scorer) {
  if (R.empty()) return {};
  std::vector<std::string> X;
  X.push_back(lib.api(R[0].api_id).tool_id);                     // X <- {tool(r_1)}
  for (std::size_t i = 1; i < R.size(); ++i) {                  // for i = 2..l
    if (R[i].rerank_score > config.tau_s) {                     //   if score(q, r_i) > tau_s
      const std::string t = lib.api(R[i].api_id).tool_id;
      if (!contains_tool(X, t)) X.push_back(t);                 //     X <- X u {tool(r_i)}
    }
  }
  std::vector<RerankedItem> F1, F2;
  for (std::size_t i = 0; i < R.size(); ++i) {                  // for i = 1..l
    if (contains_tool(X, lib.api(R[i].api_id).tool_id))
      F1.push_back(R[i]);                                       //   F1 <- F1 ++ [r_i]
    else
      F2.push_back(R[i]);                                       //   F2 <- F2 ++ [r_i]
  }
  std::vector<std::string> ext;
  for (const auto& x : X)
    if (wants_extension(lib, x, config)) ext.push_back(x);
  if (!ext.empty()) extend(F1, F2, ext, q, lib, scorer);        // rerank F1 again
  std::vector<RerankedItem> F = F1;                             // F <- F1 ++ F2
  for (const auto& r : F2) F.push_back(r);
  return F;
}

// Connected components by breadth-first search over an adjacency matrix.
inline std::vector<std::set<std::size_t>> bfs_components(std::size_t count, const std::vector<std::vector<bool>>& adj) {
  std::vector<bool> visited(count, false);
  std::vector<std::set<std::size_t>> out;
  for (std::size_t s = 0; s < count; ++s) {
    if (visited[s]) continue;
    std::set<std::size_t> comp;
    std::deque<std::size_t> frontier{s};
    visited[s] = true;
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop_front();
      comp.insert(u);
      for (std::size_t v = 0; v < count; ++v) {
        if (adj[u][v] && !visited[v]) {
          visited[v] = true;
          frontier.push_back(v);
        }
      }
    }
    out.push_back(comp);
  }
  return out;
}

// Multi-tool procedure, one statement per pseudocode line.
inline std::vector<RerankedItem> multi(const QueryRef& q, const std::vector<RerankedItem>& R,
                                       const RerankConfig& config, const ToolLibrary& lib, const DocSimilarity& sim,
                                       const RelevanceScorer* scorer) {
  const std::size_t l = R.size();
  if (l == 0) return {};
  std::vector<std::vector<bool>> adj(l, std::vector<bool>(l, false));  // G = (V, E)
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = 0; j < l; ++j) {
      if (i == j) continue;
      const bool same_tool = lib.api(R[i].api_id).tool_id == lib.api(R[j].api_id).tool_id;
      if (same_tool || sim.sim(R[i].api_id, R[j].api_id) > config.tau_m) adj[i][j] = true;
    }
  }
  std::vector<bool> in_s(l, false);                              // S <- {}
  for (const auto& comp : bfs_components(l, adj)) {             // for each component G'
    std::vector<std::size_t> rest(comp.begin(), comp.end());
    for (std::size_t taken = 0; taken < config.n && !rest.empty(); ++taken) {  // fetch at most n best
      std::size_t best = 0;
      for (std::size_t c = 1; c < rest.size(); ++c)
        if (before(R[rest[c]], R[rest[best]])) best = c;
      in_s[rest[best]] = true;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(best));
    }
  }
  std::vector<RerankedItem> F1, F2;
  for (std::size_t i = 0; i < l; ++i) (in_s[i] ? F1 : F2).push_back(R[i]);
  if (config.extend_multi) {
    std::vector<std::string> ext;
    for (const auto& r : F1) {
      const std::string t = lib.api(r.api_id).tool_id;
      if (wants_extension(lib, t, config) && !contains_tool(ext, t)) ext.push_back(t);
    }
    if (!ext.empty()) extend(F1, F2, ext, q, lib, *scorer);
  }
  std::vector<RerankedItem> F = F1;
  for (const auto& r : F2) F.push_back(r);
  return F;
}

}  // namespace oracle
