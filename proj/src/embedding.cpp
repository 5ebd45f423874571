#include "toolrank/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "toolrank/error.hpp"

namespace toolrank {

namespace {

double norm_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

double cosine_sim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error("cosine_sim: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()) + ")");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error("cosine_sim: zero-norm vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

void EmbeddingStore::add(std::string id, std::vector<double> vector) {
  if (dimension_ == 0) throw Error("embedding store has no dimension");
  if (vector.size() != dimension_)
    throw Error("vector '" + id + "' has length " + std::to_string(vector.size()) + ", expected " +
                std::to_string(dimension_));
  const double n = norm_of(vector);
  if (!(n > 0.0) || !std::isfinite(n)) throw Error("vector '" + id + "' has zero or non-finite norm");
  if (!vectors_.emplace(id, std::move(vector)).second) throw Error("duplicate vector id '" + id + "'");
}

std::span<const double> EmbeddingStore::vector(std::string_view id) const {
  auto it = vectors_.find(id);
  if (it == vectors_.end()) throw LookupError("missing vector for '" + std::string(id) + "'");
  return it->second;
}

namespace {

bool parse_double(std::string_view token, double& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> split_spaces(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

EmbeddingStore read_jsonl(std::istream& in, const std::string& source, std::string first_line) {
  EmbeddingStore store;
  bool initialised = false;
  std::size_t line_no = 0;
  std::string line = std::move(first_line);
  do {
    ++line_no;
    if (blank(line)) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(source, line_no, "", std::string("JSON parse error: ") + e.what());
    }
    if (!obj.contains("id") || !obj["id"].is_string()) throw DataError(source, line_no, "id", "expected a string");
    if (!obj.contains("vec") || !obj["vec"].is_array())
      throw DataError(source, line_no, "vec", "expected an array of numbers");
    std::vector<double> v;
    for (const auto& x : obj["vec"]) {
      if (!x.is_number()) throw DataError(source, line_no, "vec", "expected an array of numbers");
      v.push_back(x.get<double>());
    }
    if (!initialised) {
      if (v.empty()) throw DataError(source, line_no, "vec", "empty vector");
      store = EmbeddingStore(v.size());
      initialised = true;
    }
    try {
      store.add(obj["id"].get<std::string>(), std::move(v));
    } catch (const DataError&) {
      throw;
    } catch (const Error& e) {
      throw DataError(source, line_no, "vec", e.what());
    }
  } while (std::getline(in, line));
  return store;
}

}  // namespace

EmbeddingStore EmbeddingStore::read(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!blank(line)) break;
  }
  if (blank(line)) throw DataError(source_name, line_no, "", "empty embedding file");
  const auto first = line.find_first_not_of(" \t");
  if (line[first] == '{') {
    return read_jsonl(in, source_name, line);
  }

  std::string_view header(line);
  header = header.substr(first);
  while (!header.empty() && (header.back() == '\r' || header.back() == ' ')) header.remove_suffix(1);
  if (header.rfind("dim=", 0) != 0) throw DataError(source_name, line_no, "dim", "expected header 'dim=<D>'");
  std::size_t dim = 0;
  {
    auto digits = header.substr(4);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), dim);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || dim == 0)
      throw DataError(source_name, line_no, "dim", "dimension must be a positive integer");
  }
  EmbeddingStore store(dim);
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) throw DataError(source_name, line_no, "id", "expected '<id>\\t<values>'");
    std::string id = line.substr(0, tab);
    auto fields = split_spaces(std::string_view(line).substr(tab + 1));
    if (fields.size() != dim)
      throw DataError(source_name, line_no, "vec",
                      "expected " + std::to_string(dim) + " values, found " + std::to_string(fields.size()));
    std::vector<double> v(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      if (!parse_double(fields[i], v[i]))
        throw DataError(source_name, line_no, "vec", "invalid number '" + std::string(fields[i]) + "'");
    }
    try {
      store.add(std::move(id), std::move(v));
    } catch (const Error& e) {
      throw DataError(source_name, line_no, "vec", e.what());
    }
  }
  return store;
}

EmbeddingStore EmbeddingStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path, 0, "", "cannot open file");
  return read(in, path);
}

void EmbeddingStore::write(std::ostream& out) const {
  out << "dim=" << dimension_ << '\n';
  char buf[64];
  for (const auto& [id, v] : vectors_) {
    out << id << '\t';
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v[i]);
      if (i) out << ' ';
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
}

void EmbeddingStore::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path, 0, "", "cannot open file for writing");
  write(out);
}

std::vector<Candidate> dense_retrieve(const EmbeddingStore& store, std::string_view query_id,
                                      const ToolLibrary& library, std::size_t m) {
  if (m == 0) throw ConfigError("dense_retrieve: m must be at least 1");
  if (!store.contains(query_id)) throw LookupError("missing query vector for '" + std::string(query_id) + "'");
  const auto q = store.vector(query_id);
  std::vector<Candidate> all;
  all.reserve(library.api_count());
  for (const auto& [api_id, api] : library.apis()) {
    if (!store.contains(api_id)) throw LookupError("missing document vector for api '" + api_id + "'");
    all.push_back({api_id, cosine_sim(q, store.vector(api_id)), 0});
  }
  const std::size_t keep = std::min(m, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                    [](const Candidate& a, const Candidate& b) {
                      return ranks_before(a.retrieval_score, a.api_id, b.retrieval_score, b.api_id);
                    });
  all.resize(keep);
  for (std::size_t i = 0; i < all.size(); ++i) all[i].coarse_rank = i + 1;
  return all;
}

}  // namespace toolrank
