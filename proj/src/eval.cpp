#include "toolrank/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "toolrank/error.hpp"

namespace toolrank {

using nlohmann::json;

namespace {

std::unordered_set<std::string_view> as_set(const std::vector<std::string>& gold) {
  return {gold.begin(), gold.end()};
}

}  // namespace

double recall_at_k(std::span<const std::string> ranked, const std::vector<std::string>& gold, std::size_t k) {
  if (gold.empty()) throw Error("recall_at_k: empty gold set");
  const auto g = as_set(gold);
  std::unordered_set<std::string_view> hit;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i)
    if (g.count(ranked[i])) hit.insert(ranked[i]);
  return static_cast<double>(hit.size()) / static_cast<double>(g.size());
}

double ndcg_at_k(std::span<const std::string> ranked, const std::vector<std::string>& gold, std::size_t k) {
  if (gold.empty()) throw Error("ndcg_at_k: empty gold set");
  const auto g = as_set(gold);
  std::unordered_set<std::string_view> credited;
  double dcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    if (g.count(ranked[i]) && credited.insert(ranked[i]).second)
      dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  double idcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, g.size()); ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

namespace {

MetricPair mean_of(const std::vector<MetricPair>& values) {
  MetricPair out;
  if (values.empty()) return out;
  for (const auto& v : values) {
    out.ndcg += v.ndcg;
    out.recall += v.recall;
  }
  out.ndcg /= static_cast<double>(values.size());
  out.recall /= static_cast<double>(values.size());
  return out;
}

const std::vector<std::string>& canonical_subsets() {
  static const std::vector<std::string> order{"I1-Inst", "I2-Inst", "I3-Inst", "I1-Tool", "I1-Cat", "I2-Cat"};
  return order;
}

}  // namespace

MetricReport evaluate(const std::vector<PipelineResult>& results, const std::vector<EvalRecord>& records,
                      std::size_t k, const SubsetGrouping& grouping) {
  std::map<std::string_view, const EvalRecord*> by_id;
  for (const auto& r : records) by_id[r.query_id] = &r;

  MetricReport report;
  report.k = k;
  std::map<std::string, std::vector<MetricPair>> subset_values;
  std::map<std::string, std::map<QueryType, std::vector<MetricPair>>> typed_values;
  std::vector<MetricPair> all_values;
  for (const auto& res : results) {
    auto it = by_id.find(res.query_id);
    if (it == by_id.end()) throw LookupError("result for query '" + res.query_id + "' has no matching record");
    const EvalRecord& rec = *it->second;
    const auto& ranked = res.final_list.empty() ? res.topk : res.final_list;
    MetricPair m{ndcg_at_k(ranked, rec.gold_api_ids, k), recall_at_k(ranked, rec.gold_api_ids, k)};
    if (!report.per_query.emplace(res.query_id, m).second)
      throw Error("duplicate result for query '" + res.query_id + "'");
    subset_values[rec.subset].push_back(m);
    typed_values[rec.subset][rec.gold_query_type].push_back(m);
    all_values.push_back(m);
  }

  std::vector<MetricPair> seen, unseen, every;
  std::map<QueryType, std::vector<MetricPair>> typed_means;
  for (const auto& [subset, values] : subset_values) {
    const MetricPair mean = mean_of(values);
    report.per_subset[subset] = mean;
    report.subset_sizes[subset] = values.size();
    every.push_back(mean);
    if (grouping.seen.count(subset)) seen.push_back(mean);
    if (grouping.unseen.count(subset)) unseen.push_back(mean);
    for (const auto& [type, tv] : typed_values[subset]) typed_means[type].push_back(mean_of(tv));
  }
  if (!seen.empty()) report.seen_average = mean_of(seen);
  if (!unseen.empty()) report.unseen_average = mean_of(unseen);
  report.all_average = mean_of(every);
  if (typed_means.count(QueryType::single_tool)) report.single_tool_average = mean_of(typed_means[QueryType::single_tool]);
  if (typed_means.count(QueryType::multi_tool)) report.multi_tool_average = mean_of(typed_means[QueryType::multi_tool]);
  report.query_mean = mean_of(all_values);
  return report;
}

std::vector<std::string> subset_column_order(const std::vector<EvalRecord>& records) {
  std::set<std::string> present;
  for (const auto& r : records) present.insert(r.subset);
  std::vector<std::string> out;
  for (const auto& s : canonical_subsets())
    if (present.erase(s)) out.push_back(s);
  out.insert(out.end(), present.begin(), present.end());
  return out;
}

std::string percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", value * 100.0);
  return buf;
}

namespace {

json pair_json(const MetricPair& m) { return {{"N", m.ndcg}, {"R", m.recall}}; }

json optional_pair_json(const std::optional<MetricPair>& m) { return m ? pair_json(*m) : json(nullptr); }

std::vector<std::pair<std::string, std::optional<MetricPair>>> group_columns(const MetricReport& r) {
  return {{"Seen", r.seen_average},
          {"Unseen", r.unseen_average},
          {"Single", r.single_tool_average},
          {"Multi", r.multi_tool_average},
          {"All", r.all_average}};
}

std::vector<bool> present_groups(const ReportTable& table) {
  std::vector<bool> present(5, false);
  for (const auto& row : table.rows) {
    auto cols = group_columns(row.report);
    for (std::size_t i = 0; i < cols.size(); ++i) present[i] = present[i] || cols[i].second.has_value();
  }
  return present;
}

}  // namespace

void ReportTable::write_json(std::ostream& out) const {
  json doc = {{"title", title}, {"subsets", subsets}, {"rows", json::array()}};
  for (const auto& row : rows) {
    json r = {{"method", row.method}, {"k", row.report.k}, {"subsets", json::object()}};
    for (const auto& s : subsets) {
      auto it = row.report.per_subset.find(s);
      r["subsets"][s] = it == row.report.per_subset.end() ? json(nullptr) : pair_json(it->second);
    }
    r["seen_average"] = optional_pair_json(row.report.seen_average);
    r["unseen_average"] = optional_pair_json(row.report.unseen_average);
    r["single_tool_average"] = optional_pair_json(row.report.single_tool_average);
    r["multi_tool_average"] = optional_pair_json(row.report.multi_tool_average);
    r["all_average"] = pair_json(row.report.all_average);
    doc["rows"].push_back(std::move(r));
  }
  out << doc.dump(2) << '\n';
}

void ReportTable::write_csv(std::ostream& out) const {
  const auto present = present_groups(*this);
  out << "method";
  for (const auto& s : subsets) out << ',' << s << " N," << s << " R";
  const auto names = group_columns(MetricReport{});
  for (std::size_t i = 0; i < names.size(); ++i)
    if (present[i]) out << ',' << names[i].first << " N," << names[i].first << " R";
  out << '\n';
  for (const auto& row : rows) {
    out << row.method;
    for (const auto& s : subsets) {
      auto it = row.report.per_subset.find(s);
      if (it == row.report.per_subset.end())
        out << ",,";
      else
        out << ',' << percent(it->second.ndcg) << ',' << percent(it->second.recall);
    }
    const auto cols = group_columns(row.report);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (!present[i]) continue;
      if (cols[i].second)
        out << ',' << percent(cols[i].second->ndcg) << ',' << percent(cols[i].second->recall);
      else
        out << ",,";
    }
    out << '\n';
  }
}

void ReportTable::write_text(std::ostream& out) const {
  const auto present = present_groups(*this);
  std::size_t label_width = 6;
  for (const auto& row : rows) label_width = std::max(label_width, row.method.size());
  std::vector<std::string> headers = subsets;
  const auto names = group_columns(MetricReport{});
  for (std::size_t i = 0; i < names.size(); ++i)
    if (present[i]) headers.push_back(names[i].first);

  if (!title.empty()) out << title << '\n';
  out << std::left << std::setw(static_cast<int>(label_width)) << "method";
  for (const auto& h : headers) out << " | " << std::setw(11) << h;
  out << '\n' << std::setw(static_cast<int>(label_width)) << "";
  for (std::size_t i = 0; i < headers.size(); ++i) out << " | " << std::setw(5) << "N" << ' ' << std::setw(5) << "R";
  out << '\n';
  for (const auto& row : rows) {
    out << std::setw(static_cast<int>(label_width)) << row.method;
    auto cell = [&](const std::optional<MetricPair>& m) {
      out << " | " << std::right << std::setw(5) << (m ? percent(m->ndcg) : "-") << ' ' << std::setw(5)
          << (m ? percent(m->recall) : "-") << std::left;
    };
    for (const auto& s : subsets) {
      auto it = row.report.per_subset.find(s);
      cell(it == row.report.per_subset.end() ? std::nullopt : std::optional<MetricPair>(it->second));
    }
    const auto cols = group_columns(row.report);
    for (std::size_t i = 0; i < cols.size(); ++i)
      if (present[i]) cell(cols[i].second);
    out << '\n';
  }
}

GridSpec GridSpec::standard() {
  GridSpec g;
  g.m_s = {10, 30, 50};
  g.m_u = {10, 30, 50};
  g.tau_s = {0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9};
  g.tau_m = {0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9};
  g.n = {2, 3, 4};
  return g;
}

std::size_t GridSpec::raw_size() const { return m_s.size() * m_u.size() * tau_s.size() * tau_m.size() * n.size(); }

bool config_less(const RerankConfig& a, const RerankConfig& b) {
  return std::tie(a.m_s, a.m_u, a.tau_s, a.tau_m, a.n) < std::tie(b.m_s, b.m_u, b.tau_s, b.tau_m, b.n);
}

namespace {

template <typename T>
std::vector<T> sorted_axis(std::vector<T> values, const char* name) {
  if (values.empty()) throw ConfigError(std::string("grid axis '") + name + "' is empty");
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

const CoarseRetriever& need_retriever(const PipelineComponents& components) {
  if (components.retriever == nullptr) throw ConfigError("a coarse retriever is required");
  return *components.retriever;
}

double objective_of(const MetricPair& m, Objective objective) {
  return objective == Objective::mean_recall ? m.recall : m.ndcg;
}

}  // namespace

GridResult grid_search(const std::vector<EvalRecord>& dev_records, const GridSpec& grid, const RerankConfig& base,
                       const PipelineComponents& components, Mode mode, Objective objective, std::size_t jobs) {
  if (dev_records.empty()) throw ConfigError("grid search needs at least one dev record");
  const auto m_s = sorted_axis(grid.m_s, "m_s");
  const auto m_u = sorted_axis(grid.m_u, "m_u");
  const auto tau_s = sorted_axis(grid.tau_s, "tau_s");
  const auto tau_m = sorted_axis(grid.tau_m, "tau_m");
  const auto n = sorted_axis(grid.n, "n");

  const auto queries = to_pipeline_queries(dev_records);
  const PrecomputedRetriever retriever(need_retriever(components), queries, base.m);
  std::optional<MemoizingScorer> scorer;
  if (components.scorer) scorer.emplace(*components.scorer);
  std::optional<MemoizingDocSimilarity> doc_sim;
  if (components.doc_sim) doc_sim.emplace(*components.doc_sim);
  PipelineComponents cached = components;
  cached.retriever = &retriever;
  cached.scorer = scorer ? &*scorer : nullptr;
  cached.doc_sim = doc_sim ? &*doc_sim : nullptr;

  GridResult result;
  result.raw_combinations = m_s.size() * m_u.size() * tau_s.size() * tau_m.size() * n.size();
  bool have_best = false;
  for (auto ms : m_s)
    for (auto mu : m_u)
      for (auto ts : tau_s)
        for (auto tm : tau_m)
          for (auto nn : n) {
            RerankConfig cfg = base;
            cfg.m_s = ms;
            cfg.m_u = mu;
            cfg.tau_s = ts;
            cfg.tau_m = tm;
            cfg.n = nn;
            try {
              validate_for_mode(cfg, mode, grid.allow_inverted_truncation);
            } catch (const ConfigError&) {
              continue;
            }
            const auto results = run_batch(queries, cfg, cached, mode, jobs, grid.allow_inverted_truncation);
            const MetricReport report = evaluate(results, dev_records, cfg.k);
            GridRow row{cfg, objective_of(report.query_mean, objective), report.query_mean};
            if (!have_best || row.objective > result.best_objective) {
              result.best = cfg;
              result.best_objective = row.objective;
              have_best = true;
            }
            result.table.push_back(std::move(row));
          }
  if (!have_best) throw ConfigError("infeasible grid: no combination satisfies the config constraints");
  return result;
}

void GridResult::write_csv(std::ostream& out) const {
  out << "m_s,m_u,tau_s,tau_m,n,ndcg,recall,objective\n";
  char buf[256];
  for (const auto& row : table) {
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%.4g,%.4g,%zu,%.17g,%.17g,%.17g\n", row.config.m_s, row.config.m_u,
                  row.config.tau_s, row.config.tau_m, row.config.n, row.mean.ndcg, row.mean.recall, row.objective);
    out << buf;
  }
}

void GridResult::write_json(std::ostream& out) const {
  auto cfg_json = [](const RerankConfig& c) {
    return json{{"m_s", c.m_s}, {"m_u", c.m_u}, {"tau_s", c.tau_s}, {"tau_m", c.tau_m}, {"n", c.n}};
  };
  json doc = {{"best", cfg_json(best)},
              {"best_objective", best_objective},
              {"raw_combinations", raw_combinations},
              {"evaluated", table.size()},
              {"table", json::array()}};
  for (const auto& row : table) {
    json r = cfg_json(row.config);
    r["ndcg"] = row.mean.ndcg;
    r["recall"] = row.mean.recall;
    r["objective"] = row.objective;
    doc["table"].push_back(std::move(r));
  }
  out << doc.dump(2) << '\n';
}

const MetricReport& row_report(const ReportTable& table, const std::string& method) {
  for (const auto& row : table.rows)
    if (row.method == method) return row.report;
  throw LookupError("table '" + table.title + "' has no row '" + method + "'");
}

AblationTables run_ablations(const std::vector<EvalRecord>& records, const RerankConfig& base,
                             const PipelineComponents& components, const CoarseRetriever* bm25, std::size_t jobs) {
  const auto queries = to_pipeline_queries(records);
  const std::size_t depth = std::max<std::size_t>(base.m, 50);
  const PrecomputedRetriever retriever(need_retriever(components), queries, depth);
  std::optional<MemoizingScorer> scorer;
  if (components.scorer) scorer.emplace(*components.scorer);
  std::optional<MemoizingDocSimilarity> doc_sim;
  if (components.doc_sim) doc_sim.emplace(*components.doc_sim);
  PipelineComponents cached = components;
  cached.retriever = &retriever;
  cached.scorer = scorer ? &*scorer : nullptr;
  cached.doc_sim = doc_sim ? &*doc_sim : nullptr;

  auto run = [&](const std::vector<PipelineQuery>& qs, const std::vector<EvalRecord>& recs, const RerankConfig& cfg,
                 Mode mode, const PipelineComponents& comps, bool bypass = false) {
    return evaluate(run_batch(qs, cfg, comps, mode, jobs, bypass), recs, cfg.k);
  };

  AblationTables t;
  const auto columns = subset_column_order(records);

  t.main.title = "Retrieval quality by method";
  t.main.subsets = columns;
  if (bm25 != nullptr) {
    PipelineComponents with_bm25 = cached;
    with_bm25.retriever = bm25;
    t.main.rows.push_back({"BM25", run(queries, records, base, Mode::bm25, with_bm25)});
  }
  t.main.rows.push_back({"DPR", run(queries, records, base, Mode::dpr, cached)});
  for (std::size_t m : {10, 30, 50}) {
    RerankConfig cfg = base;
    cfg.m = m;
    t.main.rows.push_back({"Rerank-" + std::to_string(m), run(queries, records, cfg, Mode::rerank_m, cached)});
  }
  t.main.rows.push_back({"ToolRerank", run(queries, records, base, Mode::toolrerank, cached)});

  t.truncation.title = "Adaptive truncation (m_s, m_u)";
  t.truncation.subsets = columns;
  const std::pair<std::size_t, std::size_t> truncation_grid[] = {{10, 50}, {10, 30}, {30, 50}, {10, 10}, {30, 30},
                                                                  {50, 50}, {50, 10}, {30, 10}, {50, 30}};
  for (auto [ms, mu] : truncation_grid) {
    RerankConfig cfg = base;
    cfg.m_s = ms;
    cfg.m_u = mu;
    cfg.m = std::max({base.m, ms, mu});
    t.truncation.rows.push_back({"m_s=" + std::to_string(ms) + ",m_u=" + std::to_string(mu),
                                 run(queries, records, cfg, Mode::toolrerank, cached, true)});
  }

  t.variants.title = "Hierarchy-aware reranking variants";
  t.variants.subsets = columns;
  const std::pair<const char*, Mode> variant_modes[] = {{"ToolRerank", Mode::toolrerank},
                                                        {"ToolRerank_none", Mode::toolrerank_none},
                                                        {"ToolRerank_single", Mode::toolrerank_single},
                                                        {"ToolRerank_multi", Mode::toolrerank_multi},
                                                        {"ToolRerank_oracle", Mode::toolrerank_oracle}};
  for (const auto& [label, mode] : variant_modes)
    t.variants.rows.push_back({label, run(queries, records, base, mode, cached)});

  t.extension.title = "Extended API list (single-tool queries)";
  std::vector<EvalRecord> single_records;
  for (const auto& r : records)
    if (r.gold_query_type == QueryType::single_tool) single_records.push_back(r);
  t.extension.subsets = subset_column_order(single_records);
  const auto single_queries = to_pipeline_queries(single_records);
  const std::pair<bool, bool> extension_grid[] = {{false, true}, {false, false}, {true, true}, {true, false}};
  for (auto [seen, unseen] : extension_grid) {
    RerankConfig cfg = base;
    cfg.extend_seen = seen;
    cfg.extend_unseen = unseen;
    t.extension.rows.push_back({std::string("seen=") + (seen ? "yes" : "no") + ",unseen=" + (unseen ? "yes" : "no"),
                                run(single_queries, single_records, cfg, Mode::toolrerank, cached)});
  }
  return t;
}

void AblationTables::write_text(std::ostream& out) const {
  for (const auto* table : {&main, &truncation, &variants, &extension}) {
    table->write_text(out);
    out << '\n';
  }
}

void AblationTables::write_json(std::ostream& out) const {
  out << "{\n\"main\": ";
  main.write_json(out);
  out << ",\n\"truncation\": ";
  truncation.write_json(out);
  out << ",\n\"variants\": ";
  variants.write_json(out);
  out << ",\n\"extension\": ";
  extension.write_json(out);
  out << "}\n";
}

}  // namespace toolrank
