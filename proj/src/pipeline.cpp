#include "toolrank/pipeline.hpp"

#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <thread>

#include <json.hpp>

#include "toolrank/error.hpp"

namespace toolrank {

using nlohmann::json;

namespace {

struct ModeName {
  Mode mode;
  std::string_view name;
};

constexpr ModeName kModeNames[] = {
    {Mode::toolrerank, "toolrerank"},
    {Mode::bm25, "bm25"},
    {Mode::dpr, "dpr"},
    {Mode::rerank_m, "rerank_m"},
    {Mode::toolrerank_none, "toolrerank_none"},
    {Mode::toolrerank_single, "toolrerank_single"},
    {Mode::toolrerank_multi, "toolrerank_multi"},
    {Mode::toolrerank_oracle, "toolrerank_oracle"},
};

bool is_baseline(Mode mode) { return mode == Mode::bm25 || mode == Mode::dpr || mode == Mode::rerank_m; }

template <typename Fn>
auto in_stage(std::string_view stage, const PipelineQuery& query, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw Error("stage '" + std::string(stage) + "' failed for query '" + query.query_id + "': " + e.what());
  }
}

template <typename T>
const T& need(const T* ptr, std::string_view what) {
  if (ptr == nullptr) throw Error("pipeline component missing: " + std::string(what));
  return *ptr;
}

}  // namespace

std::string_view to_string(Mode mode) {
  for (const auto& m : kModeNames)
    if (m.mode == mode) return m.name;
  return "toolrerank";
}

Mode parse_mode(std::string_view text) {
  for (const auto& m : kModeNames)
    if (m.name == text) return m.mode;
  throw ConfigError("unknown mode '" + std::string(text) + "'");
}

const std::vector<Mode>& all_modes() {
  static const std::vector<Mode> modes = [] {
    std::vector<Mode> out;
    for (const auto& m : kModeNames) out.push_back(m.mode);
    return out;
  }();
  return modes;
}

std::string_view to_string(HierarchyStage stage) {
  switch (stage) {
    case HierarchyStage::skipped: return "skipped";
    case HierarchyStage::single_tool: return "single_tool";
    case HierarchyStage::multi_tool: return "multi_tool";
  }
  return "skipped";
}

void validate_for_mode(const RerankConfig& config, Mode mode, bool allow_inverted_truncation) {
  if (!is_baseline(mode)) {
    config.validate(allow_inverted_truncation);
    return;
  }
  if (config.k == 0 || config.m == 0) throw ConfigError("invalid rerank config: k and m must be positive");
  if (mode == Mode::rerank_m && config.k > config.m) throw ConfigError("invalid rerank config: k must not exceed m");
}

std::vector<PipelineQuery> to_pipeline_queries(const std::vector<EvalRecord>& records) {
  std::vector<PipelineQuery> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(PipelineQuery::from_record(r));
  return out;
}

PipelineResult run_pipeline(const PipelineQuery& query, const RerankConfig& config,
                            const PipelineComponents& components, Mode mode, bool allow_inverted_truncation) {
  validate_for_mode(config, mode, allow_inverted_truncation);
  const ToolLibrary& library = need(components.library, "library");
  const QueryRef ref = query.ref();

  PipelineResult result;
  result.query_id = query.query_id;
  StageTrace& trace = result.trace;

  trace.coarse = in_stage("coarse_retrieval", query, [&] {
    return need(components.retriever, "retriever").retrieve(ref, config.m);
  });

  if (mode == Mode::bm25 || mode == Mode::dpr) {
    trace.truncated = trace.coarse;
    trace.skipped_stages = {"adaptive_truncate", "cross_rerank", "classify_query", "hierarchy_rerank"};
    for (const auto& c : trace.coarse) result.final_list.push_back(c.api_id);
  } else {
    if (mode == Mode::rerank_m) {
      trace.truncated.assign(trace.coarse.begin(),
                             trace.coarse.begin() + static_cast<std::ptrdiff_t>(std::min(config.m, trace.coarse.size())));
      trace.skipped_stages.push_back("adaptive_truncate");
    } else {
      trace.truncated = in_stage("adaptive_truncate", query,
                                 [&] { return adaptive_truncate(trace.coarse, library, config.m_s, config.m_u); });
    }

    trace.reranked = in_stage("cross_rerank", query, [&] {
      return cross_rerank(ref, trace.truncated, library, need(components.scorer, "scorer"));
    });

    std::optional<QueryType> route;
    switch (mode) {
      case Mode::toolrerank:
        trace.classification = in_stage("classify_query", query, [&]() -> QueryTypeResult {
          if (config.classifier_policy == ClassifierPolicy::oracle) {
            if (!query.gold_query_type) throw Error("oracle classifier needs a gold query type");
            return {*query.gold_query_type, 1.0};
          }
          return classify_query(ref, need(components.classifier, "classifier"));
        });
        route = trace.classification->value;
        break;
      case Mode::toolrerank_oracle:
        trace.classification = in_stage("classify_query", query, [&]() -> QueryTypeResult {
          if (!query.gold_query_type) throw Error("oracle classifier needs a gold query type");
          return {*query.gold_query_type, 1.0};
        });
        route = trace.classification->value;
        break;
      case Mode::toolrerank_single:
        trace.skipped_stages.push_back("classify_query");
        trace.classification = QueryTypeResult{QueryType::single_tool, 1.0};
        route = QueryType::single_tool;
        break;
      case Mode::toolrerank_multi:
        trace.skipped_stages.push_back("classify_query");
        trace.classification = QueryTypeResult{QueryType::multi_tool, 1.0};
        route = QueryType::multi_tool;
        break;
      default:
        trace.skipped_stages.push_back("classify_query");
        break;
    }

    if (!route) {
      trace.skipped_stages.push_back("hierarchy_rerank");
      trace.final_items = trace.reranked;
    } else if (*route == QueryType::single_tool) {
      trace.hierarchy = HierarchyStage::single_tool;
      trace.final_items = in_stage("rerank_single", query, [&] {
        return rerank_single(ref, trace.reranked, config, library, need(components.scorer, "scorer"));
      });
    } else {
      trace.hierarchy = HierarchyStage::multi_tool;
      trace.final_items = in_stage("rerank_multi", query, [&] {
        return rerank_multi(ref, trace.reranked, config, library, need(components.doc_sim, "doc_sim"),
                            components.scorer);
      });
    }
    for (const auto& item : trace.final_items) result.final_list.push_back(item.api_id);
  }

  result.topk.assign(result.final_list.begin(),
                     result.final_list.begin() +
                         static_cast<std::ptrdiff_t>(std::min(config.k, result.final_list.size())));
  return result;
}

std::vector<PipelineResult> run_batch(const std::vector<PipelineQuery>& queries, const RerankConfig& config,
                                      const PipelineComponents& components, Mode mode, std::size_t jobs,
                                      bool allow_inverted_truncation) {
  std::vector<PipelineResult> results(queries.size());
  jobs = std::max<std::size_t>(1, std::min(jobs, queries.size()));
  if (jobs == 1) {
    for (std::size_t i = 0; i < queries.size(); ++i)
      results[i] = run_pipeline(queries[i], config, components, mode, allow_inverted_truncation);
    return results;
  }
  std::vector<std::exception_ptr> errors(queries.size());
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t i = w; i < queries.size(); i += jobs) {
        try {
          results[i] = run_pipeline(queries[i], config, components, mode, allow_inverted_truncation);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

PrecomputedRetriever::PrecomputedRetriever(const CoarseRetriever& inner, const std::vector<PipelineQuery>& queries,
                                           std::size_t m)
    : depth_(m), name_(inner.name()) {
  for (const auto& q : queries) lists_[q.query_id] = inner.retrieve(q.ref(), m);
}

std::vector<Candidate> PrecomputedRetriever::retrieve(const QueryRef& query, std::size_t m) const {
  auto it = lists_.find(query.query_id);
  if (it == lists_.end()) throw LookupError("no precomputed retrieval for query '" + std::string(query.query_id) + "'");
  if (m > depth_) throw Error("precomputed retrieval depth " + std::to_string(depth_) + " < requested " + std::to_string(m));
  const auto& list = it->second;
  return {list.begin(), list.begin() + static_cast<std::ptrdiff_t>(std::min(m, list.size()))};
}

double MemoizingDocSimilarity::sim(std::string_view a, std::string_view b) const {
  if (b < a) std::swap(a, b);
  auto key = pair_key(a, b);
  {
    std::shared_lock lock(mutex_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  const double value = inner_.sim(a, b);
  std::unique_lock lock(mutex_);
  memo_.emplace(std::move(key), value);
  return value;
}

namespace {

json candidates_json(const std::vector<Candidate>& list) {
  json arr = json::array();
  for (const auto& c : list) arr.push_back({{"api_id", c.api_id}, {"score", c.retrieval_score}, {"coarse_rank", c.coarse_rank}});
  return arr;
}

json items_json(const std::vector<RerankedItem>& list) {
  json arr = json::array();
  for (const auto& r : list) {
    json item = {{"api_id", r.api_id}, {"score", r.rerank_score}, {"origin", std::string(to_string(r.origin))}};
    item["pre_rerank_rank"] = r.pre_rerank_rank ? json(*r.pre_rerank_rank) : json(nullptr);
    arr.push_back(std::move(item));
  }
  return arr;
}

}  // namespace

void write_result(const PipelineResult& result, std::ostream& out, bool with_trace) {
  json obj = {{"query_id", result.query_id}, {"final_list", result.final_list}, {"topk", result.topk}};
  if (with_trace) {
    const auto& t = result.trace;
    json trace = {{"coarse", candidates_json(t.coarse)},
                  {"truncated", candidates_json(t.truncated)},
                  {"reranked", items_json(t.reranked)},
                  {"hierarchy", std::string(to_string(t.hierarchy))},
                  {"final", items_json(t.final_items)},
                  {"skipped_stages", t.skipped_stages}};
    if (t.classification)
      trace["classification"] = {{"value", std::string(to_string(t.classification->value))},
                                 {"confidence", t.classification->confidence}};
    else
      trace["classification"] = nullptr;
    obj["trace"] = std::move(trace);
  }
  out << obj.dump() << '\n';
}

void write_results(const std::vector<PipelineResult>& results, std::ostream& out, bool with_trace) {
  for (const auto& r : results) write_result(r, out, with_trace);
}

std::vector<PipelineResult> read_results(std::istream& in, const std::string& source_name) {
  std::vector<PipelineResult> results;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(source_name, line_no, "", std::string("JSON parse error: ") + e.what());
    }
    PipelineResult r;
    auto get_list = [&](const char* key, bool required) {
      std::vector<std::string> out;
      if (!obj.contains(key)) {
        if (required) throw DataError(source_name, line_no, key, "missing required field");
        return out;
      }
      if (!obj[key].is_array()) throw DataError(source_name, line_no, key, "expected an array of strings");
      for (const auto& v : obj[key]) {
        if (!v.is_string()) throw DataError(source_name, line_no, key, "expected an array of strings");
        out.push_back(v.get<std::string>());
      }
      return out;
    };
    if (!obj.is_object() || !obj.contains("query_id") || !obj["query_id"].is_string())
      throw DataError(source_name, line_no, "query_id", "missing or not a string");
    r.query_id = obj["query_id"].get<std::string>();
    r.topk = get_list("topk", true);
    r.final_list = get_list("final_list", false);
    if (r.final_list.empty()) r.final_list = r.topk;
    results.push_back(std::move(r));
  }
  return results;
}

std::vector<PipelineResult> load_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path, 0, "", "cannot open file");
  return read_results(in, path);
}

std::vector<PipelineQuery> read_queries(std::istream& in, const std::string& source_name) {
  std::vector<PipelineQuery> queries;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(source_name, line_no, "", std::string("JSON parse error: ") + e.what());
    }
    if (!obj.is_object()) throw DataError(source_name, line_no, "", "expected a JSON object");
    PipelineQuery q;
    for (const char* key : {"query_id", "query_text"}) {
      if (!obj.contains(key) || !obj[key].is_string())
        throw DataError(source_name, line_no, key, "missing or not a string");
    }
    q.query_id = obj["query_id"].get<std::string>();
    q.text = obj["query_text"].get<std::string>();
    if (q.query_id.empty()) throw DataError(source_name, line_no, "query_id", "must not be empty");
    if (obj.contains("gold_query_type") && !obj["gold_query_type"].is_null()) {
      if (!obj["gold_query_type"].is_string())
        throw DataError(source_name, line_no, "gold_query_type", "expected a string");
      try {
        q.gold_query_type = parse_query_type(obj["gold_query_type"].get<std::string>());
      } catch (const Error& e) {
        throw DataError(source_name, line_no, "gold_query_type", e.what());
      }
    }
    if (!ids.insert(q.query_id).second)
      throw DataError(source_name, line_no, "query_id", "duplicate query_id '" + q.query_id + "'");
    queries.push_back(std::move(q));
  }
  return queries;
}

std::vector<PipelineQuery> load_queries(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path, 0, "", "cannot open file");
  return read_queries(in, path);
}

}  // namespace toolrank
