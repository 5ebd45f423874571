#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "toolrank/library.hpp"
#include "toolrank/pipeline.hpp"
#include "toolrank/rerank.hpp"

namespace toolrank {

/// |gold n top-k(ranked)| / |gold|. Throws on an empty gold set.
double recall_at_k(std::span<const std::string> ranked, const std::vector<std::string>& gold, std::size_t k);

/// Binary-gain NDCG with the ideal DCG truncated at min(k, |gold|).
double ndcg_at_k(std::span<const std::string> ranked, const std::vector<std::string>& gold, std::size_t k);

struct MetricPair {
  double ndcg = 0.0;
  double recall = 0.0;
};

/// Which subset labels form the seen and unseen groups.
struct SubsetGrouping {
  std::set<std::string> seen{"I1-Inst", "I2-Inst", "I3-Inst"};
  std::set<std::string> unseen{"I1-Tool", "I1-Cat", "I2-Cat"};
};

/// Group averages are means of subset means, so each subset weighs equally.
struct MetricReport {
  std::size_t k = 5;
  std::map<std::string, MetricPair> per_query;
  std::map<std::string, MetricPair> per_subset;
  std::map<std::string, std::size_t> subset_sizes;
  std::optional<MetricPair> seen_average;
  std::optional<MetricPair> unseen_average;
  MetricPair all_average;
  /// Subset means restricted to one gold query type, then averaged over the
  /// subsets that contain that type.
  std::optional<MetricPair> single_tool_average;
  std::optional<MetricPair> multi_tool_average;
  /// Plain mean over queries.
  MetricPair query_mean;
};

MetricReport evaluate(const std::vector<PipelineResult>& results, const std::vector<EvalRecord>& records,
                      std::size_t k, const SubsetGrouping& grouping = {});

/// Canonical column order: the six benchmark subsets first, others sorted.
std::vector<std::string> subset_column_order(const std::vector<EvalRecord>& records);

struct ReportRow {
  std::string method;
  MetricReport report;
};

/// Methods x (subsets x {N, R}) table, with group averages.
struct ReportTable {
  std::string title;
  std::vector<std::string> subsets;
  std::vector<ReportRow> rows;

  void write_json(std::ostream& out) const;
  void write_csv(std::ostream& out) const;
  /// Aligned text table, values x100 at one decimal.
  void write_text(std::ostream& out) const;
};

std::string percent(double value);

// Grid search over truncation and hierarchy-aware hyperparameters.

struct GridSpec {
  std::vector<std::size_t> m_s;
  std::vector<std::size_t> m_u;
  std::vector<double> tau_s;
  std::vector<double> tau_m;
  std::vector<std::size_t> n;
  /// Also evaluate m_s > m_u combinations.
  bool allow_inverted_truncation = false;

  /// m_s, m_u in {10, 30, 50}; tau_s, tau_m in {0.6, ..., 0.9}; n in {2, 3, 4}.
  static GridSpec standard();
  std::size_t raw_size() const;
};

enum class Objective { mean_recall, mean_ndcg };

struct GridRow {
  RerankConfig config;
  double objective = 0.0;
  MetricPair mean;
};

struct GridResult {
  RerankConfig best;
  double best_objective = 0.0;
  std::size_t raw_combinations = 0;
  std::vector<GridRow> table;  // lexicographic (m_s, m_u, tau_s, tau_m, n) order

  void write_csv(std::ostream& out) const;
  void write_json(std::ostream& out) const;
};

/// Lexicographic key used for enumeration order and tie-breaking.
bool config_less(const RerankConfig& a, const RerankConfig& b);

/// Exhaustive evaluation of the feasible product. Best by objective, ties to
/// the lexicographically smallest config.
GridResult grid_search(const std::vector<EvalRecord>& dev_records, const GridSpec& grid, const RerankConfig& base,
                       const PipelineComponents& components, Mode mode = Mode::toolrerank,
                       Objective objective = Objective::mean_recall, std::size_t jobs = 1);

// Ablation tables (truncation grid, reranking variants, extended list).

struct AblationTables {
  ReportTable main;        // DPR, Rerank-{10,30,50}, ToolRerank (+ BM25 when available)
  ReportTable truncation;  // (m_s, m_u) grid including m_s > m_u
  ReportTable variants;    // none / single / multi / oracle
  ReportTable extension;   // extended list on/off for seen and unseen tools, single-tool queries

  void write_text(std::ostream& out) const;
  void write_json(std::ostream& out) const;
};

/// `bm25` is optional; when set, a BM25 row is added to the main table.
AblationTables run_ablations(const std::vector<EvalRecord>& records, const RerankConfig& base,
                             const PipelineComponents& components, const CoarseRetriever* bm25 = nullptr,
                             std::size_t jobs = 1);

/// Finds a row by method label; throws when absent.
const MetricReport& row_report(const ReportTable& table, const std::string& method);

}  // namespace toolrank
