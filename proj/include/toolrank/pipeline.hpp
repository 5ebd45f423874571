#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "toolrank/library.hpp"
#include "toolrank/rerank.hpp"
#include "toolrank/retrieval.hpp"
#include "toolrank/scoring.hpp"

namespace toolrank {

/// Retrieval methods and ablation variants.
enum class Mode {
  toolrerank,
  bm25,
  dpr,
  rerank_m,
  toolrerank_none,
  toolrerank_single,
  toolrerank_multi,
  toolrerank_oracle,
};

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);
const std::vector<Mode>& all_modes();

/// Checks the config axes a mode actually reads.
void validate_for_mode(const RerankConfig& config, Mode mode, bool allow_inverted_truncation = false);

struct PipelineQuery {
  std::string query_id;
  std::string text;
  std::optional<QueryType> gold_query_type;

  static PipelineQuery from_record(const EvalRecord& record) {
    return {record.query_id, record.query_text, record.gold_query_type};
  }
  QueryRef ref() const { return {query_id, text}; }
};

std::vector<PipelineQuery> to_pipeline_queries(const std::vector<EvalRecord>& records);

/// Reads queries from JSON Lines: query_id and query_text are required,
/// gold_query_type is optional and other fields are ignored.
std::vector<PipelineQuery> read_queries(std::istream& in, const std::string& source_name);
std::vector<PipelineQuery> load_queries(const std::string& path);

/// Shared, read-only collaborators of a pipeline run. Only the members a mode
/// needs must be set.
struct PipelineComponents {
  const ToolLibrary* library = nullptr;
  const CoarseRetriever* retriever = nullptr;
  const RelevanceScorer* scorer = nullptr;
  const QueryClassifier* classifier = nullptr;
  const DocSimilarity* doc_sim = nullptr;
};

enum class HierarchyStage { skipped, single_tool, multi_tool };
std::string_view to_string(HierarchyStage stage);

/// Per-stage snapshot: C, T, R, classification and F.
struct StageTrace {
  std::vector<Candidate> coarse;
  std::vector<Candidate> truncated;
  std::vector<RerankedItem> reranked;
  std::optional<QueryTypeResult> classification;
  HierarchyStage hierarchy = HierarchyStage::skipped;
  std::vector<RerankedItem> final_items;
  std::vector<std::string> skipped_stages;
};

struct PipelineResult {
  std::string query_id;
  std::vector<std::string> final_list;
  std::vector<std::string> topk;
  StageTrace trace;
};

/// Runs retrieve -> truncate -> cross-rerank -> classify -> hierarchy-aware
/// rerank -> top-k for one query. Component errors are rethrown prefixed with
/// the failing stage.
PipelineResult run_pipeline(const PipelineQuery& query, const RerankConfig& config,
                            const PipelineComponents& components, Mode mode,
                            bool allow_inverted_truncation = false);

/// Runs queries on up to `jobs` threads; results keep input order.
std::vector<PipelineResult> run_batch(const std::vector<PipelineQuery>& queries, const RerankConfig& config,
                                      const PipelineComponents& components, Mode mode, std::size_t jobs = 1,
                                      bool allow_inverted_truncation = false);

/// Serves prefixes of a single precomputed coarse list per query; lets grid
/// search and ablations retrieve once.
class PrecomputedRetriever final : public CoarseRetriever {
 public:
  PrecomputedRetriever(const CoarseRetriever& inner, const std::vector<PipelineQuery>& queries, std::size_t m);
  std::vector<Candidate> retrieve(const QueryRef& query, std::size_t m) const override;
  std::string name() const override { return name_; }

 private:
  std::map<std::string, std::vector<Candidate>, std::less<>> lists_;
  std::size_t depth_;
  std::string name_;
};

/// Thin memo over a DocSimilarity, keyed by the unordered pair.
class MemoizingDocSimilarity final : public DocSimilarity {
 public:
  explicit MemoizingDocSimilarity(const DocSimilarity& inner) : inner_(inner) {}
  double sim(std::string_view a, std::string_view b) const override;

 private:
  const DocSimilarity& inner_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<std::string, double> memo_;
};

void write_result(const PipelineResult& result, std::ostream& out, bool with_trace);
void write_results(const std::vector<PipelineResult>& results, std::ostream& out, bool with_trace);
std::vector<PipelineResult> read_results(std::istream& in, const std::string& source_name);
std::vector<PipelineResult> load_results(const std::string& path);

}  // namespace toolrank
