#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "toolrank/embedding.hpp"
#include "toolrank/library.hpp"
#include "toolrank/retrieval.hpp"

namespace toolrank {

/// Query/document pair handed to a relevance scorer.
struct ScoreRequest {
  QueryRef query;
  std::string_view api_id;
  std::string_view document_text;
};

/// Cross-scorer stand-in: score(q, d) in [0, 1], deterministic for fixed inputs.
class RelevanceScorer {
 public:
  virtual ~RelevanceScorer() = default;
  virtual double score(const ScoreRequest& request) const = 0;
};

/// sigma(8 * |Q n D| / max(1, |Q|) - 4) over tokenizer token sets.
double lexical_overlap_score(std::string_view query_text, std::string_view document_text);

class LexicalOverlapScorer final : public RelevanceScorer {
 public:
  double score(const ScoreRequest& request) const override {
    return lexical_overlap_score(request.query.text, request.document_text);
  }
};

enum class MissPolicy { error, fallback_scorer };

/// File-backed (query_id, api_id) -> score table used to replay externally
/// computed cross-scorer outputs.
class ScoreCache final : public RelevanceScorer {
 public:
  ScoreCache() = default;

  void put(std::string query_id, std::string api_id, double score);
  bool contains(std::string_view query_id, std::string_view api_id) const;
  std::size_t size() const noexcept { return scores_.size(); }

  void set_fallback(const RelevanceScorer* fallback) {
    fallback_ = fallback;
    policy_ = fallback ? MissPolicy::fallback_scorer : MissPolicy::error;
  }
  MissPolicy policy() const noexcept { return policy_; }

  double score(const ScoreRequest& request) const override;

  /// TSV "query_id\tapi_id\tscore"; scores outside [0, 1] are rejected.
  static ScoreCache read(std::istream& in, const std::string& source_name);
  static ScoreCache load(const std::string& path);
  void write(std::ostream& out) const;

 private:
  std::map<std::string, double, std::less<>> scores_;  // key: pair_key(query_id, api_id)
  MissPolicy policy_ = MissPolicy::error;
  const RelevanceScorer* fallback_ = nullptr;
};

/// cached_score: stored value, or the fallback's when policy allows.
double cached_score(const ScoreCache& cache, std::string_view query_id, std::string_view api_id,
                    std::string_view query_text = {}, std::string_view document_text = {});

/// Test oracle: gold pairs score 1.0, all others a seeded pseudo-random value
/// in [0, noise_ceiling].
class OracleScorer final : public RelevanceScorer {
 public:
  OracleScorer(std::map<std::string, std::set<std::string>, std::less<>> gold, double noise_ceiling,
               std::uint64_t seed);
  static OracleScorer from_records(const std::vector<EvalRecord>& records, double noise_ceiling,
                                   std::uint64_t seed);

  double score(const ScoreRequest& request) const override;

 private:
  std::map<std::string, std::set<std::string>, std::less<>> gold_;
  double noise_ceiling_;
  std::uint64_t seed_;
};

/// Thread-safe memoization over another scorer, keyed by (query_id, api_id).
class MemoizingScorer final : public RelevanceScorer {
 public:
  explicit MemoizingScorer(const RelevanceScorer& inner) : inner_(inner) {}
  double score(const ScoreRequest& request) const override;

 private:
  const RelevanceScorer& inner_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<std::string, double> memo_;
};

/// Document-document similarity sim(a, b) in [-1, 1], symmetric.
class DocSimilarity {
 public:
  virtual ~DocSimilarity() = default;
  virtual double sim(std::string_view api_a, std::string_view api_b) const = 0;
};

double embedding_doc_sim(const EmbeddingStore& store, std::string_view api_a, std::string_view api_b);

class EmbeddingDocSimilarity final : public DocSimilarity {
 public:
  explicit EmbeddingDocSimilarity(const EmbeddingStore& store) : store_(store) {}
  double sim(std::string_view a, std::string_view b) const override { return embedding_doc_sim(store_, a, b); }

 private:
  const EmbeddingStore& store_;
};

/// Sparse externally supplied similarity matrix. TSV "api_a\tapi_b\tsim";
/// absent pairs read as 0 and every id is 1.0 with itself.
class MatrixDocSimilarity final : public DocSimilarity {
 public:
  void put(std::string a, std::string b, double value);
  double sim(std::string_view a, std::string_view b) const override;

  static MatrixDocSimilarity read(std::istream& in, const std::string& source_name);
  static MatrixDocSimilarity load(const std::string& path);

 private:
  std::unordered_map<std::string, double> values_;
};

/// Composite map key for an ordered id pair; sorts like (a, b).
std::string pair_key(std::string_view a, std::string_view b);

/// 64-bit mix of a seed and two strings; used for seeded per-pair noise.
std::uint64_t hash_pair(std::uint64_t seed, std::string_view a, std::string_view b);

}  // namespace toolrank
