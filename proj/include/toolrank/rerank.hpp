#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "toolrank/library.hpp"
#include "toolrank/retrieval.hpp"
#include "toolrank/scoring.hpp"

namespace toolrank {

enum class ClassifierPolicy { oracle, heuristic, external };
enum class SimilaritySource { doc_embedding, external_matrix };

std::string_view to_string(ClassifierPolicy policy);
std::string_view to_string(SimilaritySource source);
ClassifierPolicy parse_classifier_policy(std::string_view text);
SimilaritySource parse_similarity_source(std::string_view text);

/// Hyperparameters for truncation and hierarchy-aware reranking.
struct RerankConfig {
  std::size_t m_s = 10;   // truncation position for seen-tool candidates
  std::size_t m_u = 50;   // truncation position for unseen-tool candidates
  double tau_s = 0.85;    // confidence threshold, single-tool reranking
  double tau_m = 0.7;     // similarity threshold, multi-tool graph edges
  std::size_t n = 3;      // per-component cap, multi-tool reranking
  std::size_t k = 5;      // final cut
  std::size_t m = 50;     // coarse pool size

  bool extend_unseen = true;   // extended API list for unseen tools in X
  bool extend_seen = false;    // ablation: extend seen tools as well
  bool extend_multi = false;   // ablation: extended list inside multi-tool reranking
  ClassifierPolicy classifier_policy = ClassifierPolicy::heuristic;
  SimilaritySource similarity_source = SimilaritySource::doc_embedding;

  /// Throws ConfigError unless k <= m_u <= m, m_s <= m_u, thresholds in range
  /// and all sizes positive. `allow_inverted_truncation` lifts m_s <= m_u for
  /// truncation sweeps.
  void validate(bool allow_inverted_truncation = false) const;

  friend bool operator==(const RerankConfig&, const RerankConfig&) = default;
};

enum class Origin { truncated_pool, extended_pool };
std::string_view to_string(Origin origin);

struct RerankedItem {
  std::string api_id;
  double rerank_score = 0.0;
  Origin origin = Origin::truncated_pool;
  /// 1-based position in T; empty for items pulled in by an extended list.
  std::optional<std::size_t> pre_rerank_rank;

  friend bool operator==(const RerankedItem&, const RerankedItem&) = default;
};

/// Reranking order: higher score, then smaller pre-rerank position (items
/// without one last), then smaller api_id.
bool rerank_order(const RerankedItem& a, const RerankedItem& b);

struct QueryTypeResult {
  QueryType value = QueryType::single_tool;
  double confidence = 1.0;

  friend bool operator==(const QueryTypeResult&, const QueryTypeResult&) = default;
};

/// Keeps c_i iff (seen tool and i <= m_s) or (unseen tool and i <= m_u).
std::vector<Candidate> adaptive_truncate(const std::vector<Candidate>& coarse, const ToolLibrary& library,
                                         std::size_t m_s, std::size_t m_u);

/// Scores every candidate against the query and sorts by rerank_order.
std::vector<RerankedItem> cross_rerank(const QueryRef& query, const std::vector<Candidate>& truncated,
                                       const ToolLibrary& library, const RelevanceScorer& scorer);

class QueryClassifier {
 public:
  virtual ~QueryClassifier() = default;
  virtual QueryTypeResult classify(const QueryRef& query) const = 0;
};

/// multi_tool iff at least two coordination markers ("and", "also", "then",
/// "as well", "additionally") each sit between non-marker words.
class HeuristicClassifier final : public QueryClassifier {
 public:
  QueryTypeResult classify(const QueryRef& query) const override;
  static std::size_t count_coordination_markers(std::string_view text);
};

/// Label lookup by query_id: gold labels (oracle mode) or labels produced by an
/// external classifier.
class LabelClassifier final : public QueryClassifier {
 public:
  explicit LabelClassifier(std::map<std::string, QueryTypeResult, std::less<>> labels) : labels_(std::move(labels)) {}
  static LabelClassifier from_records(const std::vector<EvalRecord>& records);
  /// TSV "query_id\tsingle_tool|multi_tool[\tconfidence]".
  static LabelClassifier load(const std::string& path);

  QueryTypeResult classify(const QueryRef& query) const override;

 private:
  std::map<std::string, QueryTypeResult, std::less<>> labels_;
};

QueryTypeResult classify_query(const QueryRef& query, const QueryClassifier& classifier);

/// Hierarchy-aware reranking for single-tool queries.
std::vector<RerankedItem> rerank_single(const QueryRef& query, const std::vector<RerankedItem>& reranked,
                                        const RerankConfig& config, const ToolLibrary& library,
                                        const RelevanceScorer& scorer);

/// Tools admitted by the single-tool rule: tool(r_1) plus every tool with a
/// later item scoring above tau_s.
std::vector<std::string> candidate_tools(const std::vector<RerankedItem>& reranked, double tau_s,
                                         const ToolLibrary& library);

struct DiversityGraph {
  std::vector<RerankedItem> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // i < j
  std::vector<std::vector<std::size_t>> components;
};

/// Edge between i and j iff same tool or sim > tau_m; components filled in.
DiversityGraph build_diversity_graph(const std::vector<RerankedItem>& reranked, double tau_m,
                                     const ToolLibrary& library, const DocSimilarity& doc_sim);

/// Partition of 0..node_count-1 induced by the edges. Each component is sorted
/// ascending and components are ordered by their smallest member.
std::vector<std::vector<std::size_t>> connected_components(std::size_t node_count,
                                                           const std::vector<std::pair<std::size_t, std::size_t>>& edges);

/// Hierarchy-aware reranking for multi-tool queries. `scorer` is only used when
/// config.extend_multi is set.
std::vector<RerankedItem> rerank_multi(const QueryRef& query, const std::vector<RerankedItem>& reranked,
                                       const RerankConfig& config, const ToolLibrary& library,
                                       const DocSimilarity& doc_sim, const RelevanceScorer* scorer = nullptr);

}  // namespace toolrank
