#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toolrank/library.hpp"
#include "toolrank/retrieval.hpp"

namespace toolrank {

/// dot(a, b) / (|a| |b|). Throws on dimension mismatch or a zero-norm input.
double cosine_sim(std::span<const double> a, std::span<const double> b);

/// Dense vectors keyed by api_id (documents) or query_id (queries).
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dimension = 0) : dimension_(dimension) {}

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return vectors_.size(); }

  /// Adds a vector; rejects wrong length, zero norm, or a duplicate id.
  void add(std::string id, std::vector<double> vector);

  bool contains(std::string_view id) const { return vectors_.find(id) != vectors_.end(); }
  std::span<const double> vector(std::string_view id) const;
  const std::map<std::string, std::vector<double>, std::less<>>& vectors() const noexcept { return vectors_; }

  /// Text form: "dim=<D>" header, then "<id>\t<f1> ... <fD>" per line.
  /// JSON Lines {"id":..., "vec":[...]} is detected and accepted as well.
  static EmbeddingStore read(std::istream& in, const std::string& source_name);
  static EmbeddingStore load(const std::string& path);
  void write(std::ostream& out) const;
  void save(const std::string& path) const;

  friend bool operator==(const EmbeddingStore&, const EmbeddingStore&) = default;

 private:
  std::size_t dimension_;
  std::map<std::string, std::vector<double>, std::less<>> vectors_;
};

/// Exact top-m cosine ranking of every library API against a stored query
/// vector.
std::vector<Candidate> dense_retrieve(const EmbeddingStore& store, std::string_view query_id,
                                      const ToolLibrary& library, std::size_t m);

class DenseRetriever final : public CoarseRetriever {
 public:
  DenseRetriever(const EmbeddingStore& store, const ToolLibrary& library) : store_(store), library_(library) {}
  std::vector<Candidate> retrieve(const QueryRef& query, std::size_t m) const override {
    return dense_retrieve(store_, query.query_id, library_, m);
  }
  std::string name() const override { return "dense"; }

 private:
  const EmbeddingStore& store_;
  const ToolLibrary& library_;
};

}  // namespace toolrank
