#include "toolrank/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "toolrank/error.hpp"
#include "toolrank/tokenizer.hpp"

namespace toolrank {

std::string pair_key(std::string_view a, std::string_view b) {
  std::string key;
  key.reserve(a.size() + b.size() + 1);
  key.append(a);
  key.push_back('\x1f');
  key.append(b);
  return key;
}

std::uint64_t hash_pair(std::uint64_t seed, std::string_view a, std::string_view b) {
  // FNV-1a over both strings, finished with a splitmix64 round.
  std::uint64_t h = 1469598103934665603ULL ^ seed;
  auto feed = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  };
  feed(a);
  feed(b);
  h += 0x9e3779b97f4a7c15ULL;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

double lexical_overlap_score(std::string_view query_text, std::string_view document_text) {
  const auto q = token_set(query_text);
  const auto d = token_set(document_text);
  std::size_t overlap = 0;
  for (const auto& t : q) overlap += d.count(t);
  const double fraction = static_cast<double>(overlap) / static_cast<double>(std::max<std::size_t>(1, q.size()));
  return 1.0 / (1.0 + std::exp(-(8.0 * fraction - 4.0)));
}

void ScoreCache::put(std::string query_id, std::string api_id, double score) {
  if (!(score >= 0.0 && score <= 1.0))
    throw Error("score for (" + query_id + ", " + api_id + ") outside [0, 1]");
  scores_[pair_key(query_id, api_id)] = score;
}

bool ScoreCache::contains(std::string_view query_id, std::string_view api_id) const {
  return scores_.find(pair_key(query_id, api_id)) != scores_.end();
}

double ScoreCache::score(const ScoreRequest& request) const {
  auto it = scores_.find(pair_key(request.query.query_id, request.api_id));
  if (it != scores_.end()) return it->second;
  if (policy_ == MissPolicy::fallback_scorer && fallback_ != nullptr) return fallback_->score(request);
  throw LookupError("score cache miss for pair (" + std::string(request.query.query_id) + ", " +
                    std::string(request.api_id) + ")");
}

double cached_score(const ScoreCache& cache, std::string_view query_id, std::string_view api_id,
                    std::string_view query_text, std::string_view document_text) {
  return cache.score({{query_id, query_text}, api_id, document_text});
}

ScoreCache ScoreCache::read(std::istream& in, const std::string& source_name) {
  ScoreCache cache;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos)
      throw DataError(source_name, line_no, "", "expected 'query_id\\tapi_id\\tscore'");
    std::string qid = line.substr(0, t1);
    std::string aid = line.substr(t1 + 1, t2 - t1 - 1);
    if (qid.empty()) throw DataError(source_name, line_no, "query_id", "must not be empty");
    if (aid.empty()) throw DataError(source_name, line_no, "api_id", "must not be empty");
    std::string_view num = std::string_view(line).substr(t2 + 1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
    if (ec != std::errc() || ptr != num.data() + num.size())
      throw DataError(source_name, line_no, "score", "invalid number '" + std::string(num) + "'");
    if (!(value >= 0.0 && value <= 1.0)) throw DataError(source_name, line_no, "score", "must lie in [0, 1]");
    cache.put(std::move(qid), std::move(aid), value);
  }
  return cache;
}

ScoreCache ScoreCache::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path, 0, "", "cannot open file");
  return read(in, path);
}

void ScoreCache::write(std::ostream& out) const {
  char buf[64];
  for (const auto& [key, value] : scores_) {
    const auto sep = key.find('\x1f');
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    out << std::string_view(key).substr(0, sep) << '\t' << std::string_view(key).substr(sep + 1) << '\t';
    out.write(buf, ptr - buf);
    out << '\n';
  }
}

OracleScorer::OracleScorer(std::map<std::string, std::set<std::string>, std::less<>> gold, double noise_ceiling,
                           std::uint64_t seed)
    : gold_(std::move(gold)), noise_ceiling_(noise_ceiling), seed_(seed) {
  if (!(noise_ceiling >= 0.0 && noise_ceiling < 0.5)) throw ConfigError("oracle noise ceiling must lie in [0, 0.5)");
}

OracleScorer OracleScorer::from_records(const std::vector<EvalRecord>& records, double noise_ceiling,
                                        std::uint64_t seed) {
  std::map<std::string, std::set<std::string>, std::less<>> gold;
  for (const auto& r : records) gold[r.query_id].insert(r.gold_api_ids.begin(), r.gold_api_ids.end());
  return OracleScorer(std::move(gold), noise_ceiling, seed);
}

double OracleScorer::score(const ScoreRequest& request) const {
  auto it = gold_.find(request.query.query_id);
  if (it == gold_.end()) throw LookupError("oracle scorer: unknown query '" + std::string(request.query.query_id) + "'");
  if (it->second.count(std::string(request.api_id))) return 1.0;
  const std::uint64_t h = hash_pair(seed_, request.query.query_id, request.api_id);
  const double unit = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
  return unit * noise_ceiling_;
}

double MemoizingScorer::score(const ScoreRequest& request) const {
  auto key = pair_key(request.query.query_id, request.api_id);
  {
    std::shared_lock lock(mutex_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  const double value = inner_.score(request);
  std::unique_lock lock(mutex_);
  memo_.emplace(std::move(key), value);
  return value;
}

double embedding_doc_sim(const EmbeddingStore& store, std::string_view api_a, std::string_view api_b) {
  if (!store.contains(api_a)) throw LookupError("missing document vector for api '" + std::string(api_a) + "'");
  if (!store.contains(api_b)) throw LookupError("missing document vector for api '" + std::string(api_b) + "'");
  if (api_a == api_b) return 1.0;
  return cosine_sim(store.vector(api_a), store.vector(api_b));
}

void MatrixDocSimilarity::put(std::string a, std::string b, double value) {
  if (!(value >= -1.0 && value <= 1.0)) throw Error("similarity for (" + a + ", " + b + ") outside [-1, 1]");
  if (b < a) std::swap(a, b);
  values_[pair_key(a, b)] = value;
}

double MatrixDocSimilarity::sim(std::string_view a, std::string_view b) const {
  if (a == b) return 1.0;
  if (b < a) std::swap(a, b);
  auto it = values_.find(pair_key(a, b));
  return it == values_.end() ? 0.0 : it->second;
}

MatrixDocSimilarity MatrixDocSimilarity::read(std::istream& in, const std::string& source_name) {
  MatrixDocSimilarity m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw DataError(source_name, line_no, "", "expected 'api_a\\tapi_b\\tsim'");
    std::string_view num = std::string_view(line).substr(t2 + 1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
    if (ec != std::errc() || ptr != num.data() + num.size())
      throw DataError(source_name, line_no, "sim", "invalid number '" + std::string(num) + "'");
    if (!(value >= -1.0 && value <= 1.0)) throw DataError(source_name, line_no, "sim", "must lie in [-1, 1]");
    const std::string a = line.substr(0, t1);
    const std::string b = line.substr(t1 + 1, t2 - t1 - 1);
    const auto key = pair_key(std::min(a, b), std::max(a, b));
    auto it = m.values_.find(key);
    if (it != m.values_.end() && it->second != value)
      throw DataError(source_name, line_no, "sim", "asymmetric duplicate for (" + a + ", " + b + ")");
    m.put(a, b, value);
  }
  return m;
}

MatrixDocSimilarity MatrixDocSimilarity::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path, 0, "", "cannot open file");
  return read(in, path);
}

}  // namespace toolrank
