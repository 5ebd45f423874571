#include "toolrank/rerank.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_set>

#include "toolrank/error.hpp"
#include "toolrank/tokenizer.hpp"

namespace toolrank {

std::string_view to_string(ClassifierPolicy policy) {
  switch (policy) {
    case ClassifierPolicy::oracle: return "oracle";
    case ClassifierPolicy::heuristic: return "heuristic";
    case ClassifierPolicy::external: return "external";
  }
  return "heuristic";
}

std::string_view to_string(SimilaritySource source) {
  return source == SimilaritySource::doc_embedding ? "doc_embedding" : "external_matrix";
}

ClassifierPolicy parse_classifier_policy(std::string_view text) {
  if (text == "oracle") return ClassifierPolicy::oracle;
  if (text == "heuristic") return ClassifierPolicy::heuristic;
  if (text == "external") return ClassifierPolicy::external;
  throw ConfigError("unknown classifier policy '" + std::string(text) + "'");
}

SimilaritySource parse_similarity_source(std::string_view text) {
  if (text == "doc_embedding") return SimilaritySource::doc_embedding;
  if (text == "external_matrix") return SimilaritySource::external_matrix;
  throw ConfigError("unknown similarity source '" + std::string(text) + "'");
}

std::string_view to_string(Origin origin) {
  return origin == Origin::truncated_pool ? "truncated_pool" : "extended_pool";
}

void RerankConfig::validate(bool allow_inverted_truncation) const {
  auto fail = [](const std::string& msg) { throw ConfigError("invalid rerank config: " + msg); };
  if (m_s == 0 || m_u == 0 || n == 0 || k == 0 || m == 0) fail("m_s, m_u, n, k and m must be positive");
  if (!(tau_s >= 0.0 && tau_s <= 1.0)) fail("tau_s must lie in [0, 1]");
  if (!(tau_m >= -1.0 && tau_m <= 1.0)) fail("tau_m must lie in [-1, 1]");
  if (!allow_inverted_truncation && m_s > m_u) fail("m_s must not exceed m_u");
  if (m_u > m) fail("m_u must not exceed m");
  if (m_s > m) fail("m_s must not exceed m");
  if (k > std::max(m_s, m_u)) fail("k must not exceed m_u");
}

bool rerank_order(const RerankedItem& a, const RerankedItem& b) {
  if (a.rerank_score != b.rerank_score) return a.rerank_score > b.rerank_score;
  if (a.pre_rerank_rank != b.pre_rerank_rank) {
    if (!a.pre_rerank_rank) return false;
    if (!b.pre_rerank_rank) return true;
    return *a.pre_rerank_rank < *b.pre_rerank_rank;
  }
  return a.api_id < b.api_id;
}

std::vector<Candidate> adaptive_truncate(const std::vector<Candidate>& coarse, const ToolLibrary& library,
                                         std::size_t m_s, std::size_t m_u) {
  std::vector<Candidate> kept;
  for (const auto& c : coarse) {
    const bool seen = library.is_seen(library.tool_of(c.api_id).tool_id);
    const std::size_t limit = seen ? m_s : m_u;
    if (c.coarse_rank <= limit) kept.push_back(c);
  }
  return kept;
}

namespace {

double checked_score(const RelevanceScorer& scorer, const QueryRef& query, const ApiDoc& api) {
  double s = 0.0;
  try {
    s = scorer.score({query, api.api_id, api.document_text});
  } catch (const Error& e) {
    throw Error("scoring pair (" + std::string(query.query_id) + ", " + api.api_id + ") failed: " + e.what());
  }
  if (!(s >= 0.0 && s <= 1.0))
    throw Error("scorer returned " + std::to_string(s) + " outside [0, 1] for pair (" +
                std::string(query.query_id) + ", " + api.api_id + ")");
  return s;
}

// Pulls every API of `tool_ids` into `head`: items already in `tail` move
// over with their original entry, the rest enter as extended-pool items. The
// whole head is then rescored and sorted.
void extend_and_rescore(std::vector<RerankedItem>& head, std::vector<RerankedItem>& tail,
                        const std::vector<std::string>& tool_ids, const QueryRef& query,
                        const ToolLibrary& library, const RelevanceScorer& scorer) {
  std::unordered_set<std::string> present;
  for (const auto& item : head) present.insert(item.api_id);
  std::vector<RerankedItem> additions;
  for (const auto& tool_id : tool_ids) {
    for (const auto& api_id : library.tool(tool_id).api_ids) {
      if (!present.insert(api_id).second) continue;
      auto it = std::find_if(tail.begin(), tail.end(), [&](const RerankedItem& r) { return r.api_id == api_id; });
      if (it != tail.end()) {
        additions.push_back(std::move(*it));
        tail.erase(it);
      } else {
        additions.push_back({api_id, 0.0, Origin::extended_pool, std::nullopt});
      }
    }
  }
  for (auto& item : additions) head.push_back(std::move(item));
  for (auto& item : head) item.rerank_score = checked_score(scorer, query, library.api(item.api_id));
  std::sort(head.begin(), head.end(), rerank_order);
}

bool should_extend(const std::string& tool_id, const RerankConfig& config, const ToolLibrary& library) {
  return library.is_seen(tool_id) ? config.extend_seen : config.extend_unseen;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    std::size_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) x = std::exchange(parent_[x], root);
    return root;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

}  // namespace

std::vector<RerankedItem> cross_rerank(const QueryRef& query, const std::vector<Candidate>& truncated,
                                       const ToolLibrary& library, const RelevanceScorer& scorer) {
  std::unordered_set<std::string_view> ids;
  std::vector<RerankedItem> out;
  out.reserve(truncated.size());
  for (std::size_t i = 0; i < truncated.size(); ++i) {
    const auto& c = truncated[i];
    if (!ids.insert(c.api_id).second) throw Error("cross_rerank: duplicate candidate '" + c.api_id + "'");
    out.push_back({c.api_id, checked_score(scorer, query, library.api(c.api_id)), Origin::truncated_pool, i + 1});
  }
  std::sort(out.begin(), out.end(), rerank_order);
  return out;
}

std::size_t HeuristicClassifier::count_coordination_markers(std::string_view text) {
  const auto tokens = tokenize(text);
  // Collapse the token stream into word / marker-run symbols; a marker run
  // counts when words sit on both sides of it.
  std::vector<bool> is_marker_run;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    bool marker = t == "and" || t == "also" || t == "then" || t == "additionally";
    if (t == "as" && i + 1 < tokens.size() && tokens[i + 1] == "well") {
      marker = true;
      ++i;
    }
    if (marker && !is_marker_run.empty() && is_marker_run.back()) continue;
    is_marker_run.push_back(marker);
  }
  std::size_t count = 0;
  for (std::size_t i = 1; i + 1 < is_marker_run.size(); ++i) count += is_marker_run[i] ? 1 : 0;
  return count;
}

QueryTypeResult HeuristicClassifier::classify(const QueryRef& query) const {
  const bool multi = count_coordination_markers(query.text) >= 2;
  return {multi ? QueryType::multi_tool : QueryType::single_tool, 1.0};
}

LabelClassifier LabelClassifier::from_records(const std::vector<EvalRecord>& records) {
  std::map<std::string, QueryTypeResult, std::less<>> labels;
  for (const auto& r : records) labels[r.query_id] = {r.gold_query_type, 1.0};
  return LabelClassifier(std::move(labels));
}

LabelClassifier LabelClassifier::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path, 0, "", "cannot open file");
  std::map<std::string, QueryTypeResult, std::less<>> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() < 2 || fields.size() > 3)
      throw DataError(path, line_no, "", "expected 'query_id\\tquery_type[\\tconfidence]'");
    QueryTypeResult r;
    try {
      r.value = parse_query_type(fields[1]);
    } catch (const Error& e) {
      throw DataError(path, line_no, "query_type", e.what());
    }
    if (fields.size() == 3) {
      try {
        std::size_t used = 0;
        r.confidence = std::stod(fields[2], &used);
        if (used != fields[2].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw DataError(path, line_no, "confidence", "invalid number '" + fields[2] + "'");
      }
      if (!(r.confidence >= 0.0 && r.confidence <= 1.0))
        throw DataError(path, line_no, "confidence", "must lie in [0, 1]");
    }
    labels[fields[0]] = r;
  }
  return LabelClassifier(std::move(labels));
}

QueryTypeResult LabelClassifier::classify(const QueryRef& query) const {
  auto it = labels_.find(query.query_id);
  if (it == labels_.end()) throw LookupError("no query-type label for '" + std::string(query.query_id) + "'");
  return it->second;
}

QueryTypeResult classify_query(const QueryRef& query, const QueryClassifier& classifier) {
  return classifier.classify(query);
}

std::vector<std::string> candidate_tools(const std::vector<RerankedItem>& reranked, double tau_s,
                                         const ToolLibrary& library) {
  std::vector<std::string> tools;
  if (reranked.empty()) return tools;
  tools.push_back(library.api(reranked.front().api_id).tool_id);
  for (std::size_t i = 1; i < reranked.size(); ++i) {
    if (reranked[i].rerank_score <= tau_s) continue;
    const auto& tool_id = library.api(reranked[i].api_id).tool_id;
    if (std::find(tools.begin(), tools.end(), tool_id) == tools.end()) tools.push_back(tool_id);
  }
  return tools;
}

std::vector<RerankedItem> rerank_single(const QueryRef& query, const std::vector<RerankedItem>& reranked,
                                        const RerankConfig& config, const ToolLibrary& library,
                                        const RelevanceScorer& scorer) {
  if (reranked.empty()) return {};
  const auto tools = candidate_tools(reranked, config.tau_s, library);
  const std::set<std::string_view> in_x(tools.begin(), tools.end());

  std::vector<RerankedItem> head;
  std::vector<RerankedItem> tail;
  for (const auto& item : reranked)
    (in_x.count(library.api(item.api_id).tool_id) ? head : tail).push_back(item);

  std::vector<std::string> extended;
  for (const auto& t : tools) {
    if (should_extend(t, config, library)) extended.push_back(t);
  }
  if (!extended.empty()) extend_and_rescore(head, tail, extended, query, library, scorer);

  head.insert(head.end(), std::make_move_iterator(tail.begin()), std::make_move_iterator(tail.end()));
  return head;
}

std::vector<std::vector<std::size_t>> connected_components(std::size_t node_count,
                                                           const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  UnionFind uf(node_count);
  for (const auto& [a, b] : edges) {
    if (a >= node_count || b >= node_count) throw Error("connected_components: edge endpoint out of range");
    uf.unite(a, b);
  }
  std::vector<std::vector<std::size_t>> components;
  std::vector<std::size_t> slot(node_count, node_count);
  for (std::size_t i = 0; i < node_count; ++i) {
    const std::size_t root = uf.find(i);
    if (slot[root] == node_count) {
      slot[root] = components.size();
      components.emplace_back();
    }
    components[slot[root]].push_back(i);
  }
  return components;
}

DiversityGraph build_diversity_graph(const std::vector<RerankedItem>& reranked, double tau_m,
                                     const ToolLibrary& library, const DocSimilarity& doc_sim) {
  DiversityGraph g;
  g.nodes = reranked;
  std::vector<std::string_view> tool_ids;
  tool_ids.reserve(reranked.size());
  for (const auto& item : reranked) tool_ids.push_back(library.api(item.api_id).tool_id);
  for (std::size_t i = 0; i < reranked.size(); ++i) {
    for (std::size_t j = i + 1; j < reranked.size(); ++j) {
      if (tool_ids[i] == tool_ids[j] || doc_sim.sim(reranked[i].api_id, reranked[j].api_id) > tau_m)
        g.edges.emplace_back(i, j);
    }
  }
  g.components = connected_components(reranked.size(), g.edges);
  return g;
}

std::vector<RerankedItem> rerank_multi(const QueryRef& query, const std::vector<RerankedItem>& reranked,
                                       const RerankConfig& config, const ToolLibrary& library,
                                       const DocSimilarity& doc_sim, const RelevanceScorer* scorer) {
  if (reranked.empty()) return {};
  const DiversityGraph graph = build_diversity_graph(reranked, config.tau_m, library, doc_sim);

  std::vector<bool> selected(reranked.size(), false);
  for (auto members : graph.components) {
    std::sort(members.begin(), members.end(),
              [&](std::size_t a, std::size_t b) { return rerank_order(reranked[a], reranked[b]); });
    for (std::size_t i = 0; i < std::min(config.n, members.size()); ++i) selected[members[i]] = true;
  }

  std::vector<RerankedItem> head;
  std::vector<RerankedItem> tail;
  for (std::size_t i = 0; i < reranked.size(); ++i) (selected[i] ? head : tail).push_back(reranked[i]);

  if (config.extend_multi) {
    if (scorer == nullptr) throw Error("rerank_multi: extended list requested without a scorer");
    std::vector<std::string> extended;
    for (const auto& item : head) {
      const auto& tool_id = library.api(item.api_id).tool_id;
      if (should_extend(tool_id, config, library) &&
          std::find(extended.begin(), extended.end(), tool_id) == extended.end())
        extended.push_back(tool_id);
    }
    if (!extended.empty()) extend_and_rescore(head, tail, extended, query, library, *scorer);
  }

  head.insert(head.end(), std::make_move_iterator(tail.begin()), std::make_move_iterator(tail.end()));
  return head;
}

}  // namespace toolrank
