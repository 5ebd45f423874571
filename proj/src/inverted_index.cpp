#include "toolrank/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "toolrank/error.hpp"
#include "toolrank/tokenizer.hpp"

namespace toolrank {

InvertedIndex InvertedIndex::build(const ToolLibrary& library) {
  std::vector<std::pair<std::string, std::string>> docs;
  docs.reserve(library.api_count());
  for (const auto& [id, api] : library.apis()) docs.emplace_back(id, api.document_text);
  return build(docs);
}

InvertedIndex InvertedIndex::build(const std::vector<std::pair<std::string, std::string>>& documents) {
  InvertedIndex index;
  for (const auto& [id, text] : documents) {
    const auto tokens = tokenize(text);
    if (!index.doc_lengths_.emplace(id, tokens.size()).second)
      throw Error("duplicate document id '" + id + "' while indexing");
    std::map<std::string_view, std::size_t> tf;
    for (const auto& t : tokens) ++tf[t];
    for (const auto& [term, count] : tf) index.postings_[std::string(term)].push_back({id, count});
  }
  index.finalize();
  return index;
}

void InvertedIndex::finalize() {
  for (auto& [term, list] : postings_)
    std::sort(list.begin(), list.end(), [](const Posting& a, const Posting& b) { return a.api_id < b.api_id; });
  double total = 0.0;
  for (const auto& [id, len] : doc_lengths_) total += static_cast<double>(len);
  avg_doc_length_ = doc_lengths_.empty() ? 0.0 : total / static_cast<double>(doc_lengths_.size());
}

const std::vector<Posting>* InvertedIndex::find(std::string_view term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? nullptr : &it->second;
}

void InvertedIndex::write_json(std::ostream& out) const {
  nlohmann::json doc;
  doc["doc_count"] = doc_count();
  doc["avg_doc_length"] = avg_doc_length_;
  doc["doc_lengths"] = nlohmann::json::object();
  for (const auto& [id, len] : doc_lengths_) doc["doc_lengths"][id] = len;
  doc["postings"] = nlohmann::json::object();
  for (const auto& [term, list] : postings_) {
    auto arr = nlohmann::json::array();
    for (const auto& p : list) arr.push_back({p.api_id, p.term_frequency});
    doc["postings"][term] = std::move(arr);
  }
  out << doc.dump() << '\n';
}

InvertedIndex InvertedIndex::read_json(std::istream& in, const std::string& source_name) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(source_name, 0, "", std::string("JSON parse error: ") + e.what());
  }
  InvertedIndex index;
  try {
    for (const auto& [id, len] : doc.at("doc_lengths").items()) index.doc_lengths_[id] = len.get<std::size_t>();
    for (const auto& [term, arr] : doc.at("postings").items()) {
      auto& list = index.postings_[term];
      for (const auto& p : arr) {
        Posting posting{p.at(0).get<std::string>(), p.at(1).get<std::size_t>()};
        if (!index.doc_lengths_.count(posting.api_id))
          throw DataError(source_name, 0, "postings", "term '" + term + "' references unindexed id '" +
                                                          posting.api_id + "'");
        list.push_back(std::move(posting));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(source_name, 0, "", std::string("malformed index: ") + e.what());
  }
  index.finalize();
  return index;
}

namespace {

double idf(std::size_t doc_count, std::size_t doc_freq) {
  const auto n = static_cast<double>(doc_freq);
  const auto total = static_cast<double>(doc_count);
  return std::log(1.0 + (total - n + 0.5) / (n + 0.5));
}

double term_weight(std::size_t tf, std::size_t doc_len, double avg_len, const Bm25Params& p) {
  const auto f = static_cast<double>(tf);
  const double norm = avg_len > 0.0 ? static_cast<double>(doc_len) / avg_len : 0.0;
  return f * (p.k1 + 1.0) / (f + p.k1 * (1.0 - p.b + p.b * norm));
}

}  // namespace

double bm25_score(const InvertedIndex& index, const std::vector<std::string>& query_terms,
                  std::string_view api_id, const Bm25Params& params) {
  auto len_it = index.doc_lengths().find(api_id);
  if (len_it == index.doc_lengths().end()) throw LookupError("document '" + std::string(api_id) + "' not indexed");
  double score = 0.0;
  for (const auto& term : query_terms) {
    const auto* list = index.find(term);
    if (list == nullptr) continue;
    auto it = std::lower_bound(list->begin(), list->end(), api_id,
                               [](const Posting& p, std::string_view id) { return p.api_id < id; });
    if (it == list->end() || it->api_id != api_id) continue;
    score += idf(index.doc_count(), list->size()) *
             term_weight(it->term_frequency, len_it->second, index.avg_doc_length(), params);
  }
  return score;
}

std::vector<Candidate> bm25_retrieve(const InvertedIndex& index, std::string_view query_text, std::size_t m,
                                     const Bm25Params& params) {
  if (m == 0) throw ConfigError("bm25_retrieve: m must be at least 1");
  const auto terms = tokenize(query_text);

  // Accumulate term-at-a-time in query order so scores do not depend on the
  // order documents were indexed in.
  std::unordered_map<std::string_view, double> acc;
  for (const auto& term : terms) {
    const auto* list = index.find(term);
    if (list == nullptr) continue;
    const double w = idf(index.doc_count(), list->size());
    for (const auto& p : *list) {
      const std::size_t len = index.doc_lengths().find(p.api_id)->second;
      acc[p.api_id] += w * term_weight(p.term_frequency, len, index.avg_doc_length(), params);
    }
  }

  std::vector<Candidate> all;
  all.reserve(index.doc_count());
  for (const auto& [id, len] : index.doc_lengths()) {
    auto it = acc.find(id);
    const double s = it == acc.end() ? 0.0 : it->second;
    if (params.strict && s <= 0.0) continue;
    all.push_back({id, s, 0});
  }
  const std::size_t keep = std::min(m, all.size());
  auto cmp = [](const Candidate& a, const Candidate& b) {
    return ranks_before(a.retrieval_score, a.api_id, b.retrieval_score, b.api_id);
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), cmp);
  all.resize(keep);
  for (std::size_t i = 0; i < all.size(); ++i) all[i].coarse_rank = i + 1;
  return all;
}

}  // namespace toolrank
