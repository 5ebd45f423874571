#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "toolrank/library.hpp"

namespace toolrank {

/// One entry of a coarse retrieval list.
struct Candidate {
  std::string api_id;
  double retrieval_score = 0.0;
  std::size_t coarse_rank = 0;  // 1-based position in the coarse list

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Shared ordering for scored lists: higher score first, then smaller api_id.
inline bool ranks_before(double score_a, std::string_view id_a, double score_b, std::string_view id_b) {
  if (score_a != score_b) return score_a > score_b;
  return id_a < id_b;
}

struct Posting {
  std::string api_id;
  std::size_t term_frequency = 0;

  friend bool operator==(const Posting&, const Posting&) = default;
};

class InvertedIndex {
 public:
  /// Index every API's rendered document.
  static InvertedIndex build(const ToolLibrary& library);

  /// Generic builder over (id, text) pairs.
  static InvertedIndex build(const std::vector<std::pair<std::string, std::string>>& documents);

  const std::map<std::string, std::vector<Posting>, std::less<>>& postings() const noexcept { return postings_; }
  const std::map<std::string, std::size_t, std::less<>>& doc_lengths() const noexcept { return doc_lengths_; }
  double avg_doc_length() const noexcept { return avg_doc_length_; }
  std::size_t doc_count() const noexcept { return doc_lengths_.size(); }

  const std::vector<Posting>* find(std::string_view term) const;

  void write_json(std::ostream& out) const;
  static InvertedIndex read_json(std::istream& in, const std::string& source_name);

  friend bool operator==(const InvertedIndex&, const InvertedIndex&) = default;

 private:
  void finalize();

  std::map<std::string, std::vector<Posting>, std::less<>> postings_;
  std::map<std::string, std::size_t, std::less<>> doc_lengths_;
  double avg_doc_length_ = 0.0;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
  /// Drop zero-score documents instead of padding with them.
  bool strict = false;
};

/// Okapi BM25 with idf = ln(1 + (N - n + 0.5) / (n + 0.5)). Repeated query
/// terms contribute once per occurrence.
double bm25_score(const InvertedIndex& index, const std::vector<std::string>& query_terms,
                  std::string_view api_id, const Bm25Params& params = {});

std::vector<Candidate> bm25_retrieve(const InvertedIndex& index, std::string_view query_text, std::size_t m,
                                     const Bm25Params& params = {});

/// A query as seen by retrievers and scorers.
struct QueryRef {
  std::string_view query_id;
  std::string_view text;
};

/// First-stage retriever producing the coarse list C.
class CoarseRetriever {
 public:
  virtual ~CoarseRetriever() = default;
  virtual std::vector<Candidate> retrieve(const QueryRef& query, std::size_t m) const = 0;
  virtual std::string name() const = 0;
};

class Bm25Retriever final : public CoarseRetriever {
 public:
  explicit Bm25Retriever(const InvertedIndex& index, Bm25Params params = {}) : index_(index), params_(params) {}
  std::vector<Candidate> retrieve(const QueryRef& query, std::size_t m) const override {
    return bm25_retrieve(index_, query.text, m, params_);
  }
  std::string name() const override { return "bm25"; }

 private:
  const InvertedIndex& index_;
  Bm25Params params_;
};

}  // namespace toolrank
