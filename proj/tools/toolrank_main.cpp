#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "toolrank/embedding.hpp"
#include "toolrank/error.hpp"
#include "toolrank/eval.hpp"
#include "toolrank/library.hpp"
#include "toolrank/pipeline.hpp"
#include "toolrank/rerank.hpp"
#include "toolrank/retrieval.hpp"
#include "toolrank/scoring.hpp"
#include "toolrank/synth.hpp"

namespace {

using nlohmann::json;
using namespace toolrank;

constexpr const char* kFormats = R"(File formats:
  library      JSON Lines. First line {"kind":"meta","seen_tools":[...]}, then
               {"kind":"tool","tool_id","tool_name","category","api_ids":[...]}
               followed by its {"kind":"api","api_id","tool_id","api_name",
               "description","document_text"?} records.
  queries      JSON Lines {"query_id","query_text","gold_api_ids":[...],
               "gold_query_type":"single_tool"|"multi_tool","subset"}.
               rerank and retrieve only need query_id and query_text.
  embeddings   "dim=<D>" header, then "<id>\t<v1> ... <vD>" per line, ids are
               api_ids and query_ids. JSON Lines {"id","vec"} is also accepted.
  scores       TSV "query_id\tapi_id\tscore" with scores in [0, 1].
  similarity   TSV "api_a\tapi_b\tsim"; absent pairs read as 0.
  labels       TSV "query_id\tsingle_tool|multi_tool[\tconfidence]".
  config       JSON object with any of m_s, m_u, tau_s, tau_m, n, k, m,
               extend_unseen, extend_seen, extend_multi, classifier_policy,
               similarity_source.
  results      JSON Lines {"query_id","final_list":[...],"topk":[...],"trace"?}.
)";

std::ofstream open_out(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path, 0, "", "cannot open file for writing");
  return out;
}

template <typename T>
T json_value(const json& obj, const std::string& key, const std::string& path) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError(path, 0, key, "wrong type");
  }
}

void apply_config_file(RerankConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path, 0, "", "cannot open file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path, 0, "", std::string("JSON parse error: ") + e.what());
  }
  if (!doc.is_object()) throw DataError(path, 0, "", "expected a JSON object");
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (key == "m_s") cfg.m_s = json_value<std::size_t>(doc, key, path);
    else if (key == "m_u") cfg.m_u = json_value<std::size_t>(doc, key, path);
    else if (key == "tau_s") cfg.tau_s = json_value<double>(doc, key, path);
    else if (key == "tau_m") cfg.tau_m = json_value<double>(doc, key, path);
    else if (key == "n") cfg.n = json_value<std::size_t>(doc, key, path);
    else if (key == "k") cfg.k = json_value<std::size_t>(doc, key, path);
    else if (key == "m") cfg.m = json_value<std::size_t>(doc, key, path);
    else if (key == "extend_unseen") cfg.extend_unseen = json_value<bool>(doc, key, path);
    else if (key == "extend_seen") cfg.extend_seen = json_value<bool>(doc, key, path);
    else if (key == "extend_multi") cfg.extend_multi = json_value<bool>(doc, key, path);
    else if (key == "classifier_policy") {
      try {
        cfg.classifier_policy = parse_classifier_policy(json_value<std::string>(doc, key, path));
      } catch (const DataError&) {
        throw;
      } catch (const Error& e) {
        throw DataError(path, 0, key, e.what());
      }
    } else if (key == "similarity_source") {
      try {
        cfg.similarity_source = parse_similarity_source(json_value<std::string>(doc, key, path));
      } catch (const DataError&) {
        throw;
      } catch (const Error& e) {
        throw DataError(path, 0, key, e.what());
      }
    } else {
      throw DataError(path, 0, key, "unknown config key");
    }
  }
}

/// Flags shared by rerank and grid-search.
struct EngineFlags {
  std::string library;
  std::string queries;
  std::string embeddings;
  std::string retriever = "dense";
  std::string scorer;
  std::string scores;
  std::string score_miss = "error";
  std::optional<std::uint64_t> seed;
  double oracle_noise = 0.3;
  std::string config;
  std::string mode = "toolrerank";
  std::optional<std::size_t> k, m, m_s, m_u, n;
  std::optional<double> tau_s, tau_m;
  std::optional<bool> extend_unseen, extend_seen, extend_multi;
  std::string classifier;
  std::string classifications;
  std::string similarity;
  std::string similarity_matrix;
  std::size_t jobs = 1;
  bool allow_inverted = false;
};

void add_engine_flags(CLI::App* cmd, EngineFlags& f, bool with_hyperparameters) {
  cmd->add_option("--library", f.library, "Tool library (JSON Lines)")->required();
  cmd->add_option("--queries", f.queries, "Queries file (JSON Lines)")->required();
  cmd->add_option("--embeddings", f.embeddings, "Embedding file for dense retrieval and doc similarity");
  cmd->add_option("--retriever", f.retriever, "Coarse retriever: dense or bm25 (mode bm25 forces bm25)")
      ->check(CLI::IsMember({"dense", "bm25"}))
      ->capture_default_str();
  cmd->add_option("--scorer", f.scorer, "Relevance scorer: lexical, oracle or cache (default: cache with --scores, else lexical)")
      ->check(CLI::IsMember({"lexical", "oracle", "cache"}));
  cmd->add_option("--scores", f.scores, "Score cache TSV replayed as the cross scorer");
  cmd->add_option("--score-miss", f.score_miss, "Score cache miss policy: error or lexical")
      ->check(CLI::IsMember({"error", "lexical"}))
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "Seed of the oracle scorer noise (required with --scorer oracle)");
  cmd->add_option("--oracle-noise", f.oracle_noise, "Noise ceiling of the oracle scorer, in [0, 0.5)")
      ->capture_default_str();
  cmd->add_option("--config", f.config, "JSON config file; explicit flags override it");
  cmd->add_option("--mode", f.mode,
                  "Mode: toolrerank, bm25, dpr, rerank_m, toolrerank_none, toolrerank_single, "
                  "toolrerank_multi, toolrerank_oracle")
      ->capture_default_str();
  cmd->add_option("--k", f.k, "Final cut (default 5)");
  cmd->add_option("--m", f.m, "Coarse pool size (default 50)");
  if (with_hyperparameters) {
    cmd->add_option("--m-s", f.m_s, "Truncation position for seen tools (default 10)");
    cmd->add_option("--m-u", f.m_u, "Truncation position for unseen tools (default 50)");
    cmd->add_option("--tau-s", f.tau_s, "Single-tool confidence threshold (default 0.85)");
    cmd->add_option("--tau-m", f.tau_m, "Multi-tool similarity threshold (default 0.7)");
    cmd->add_option("--n", f.n, "Per-component cap in multi-tool reranking (default 3)");
  }
  cmd->add_option("--extend-unseen", f.extend_unseen, "Extended API list for unseen tools: true or false (default true)");
  cmd->add_option("--extend-seen", f.extend_seen, "Extended API list for seen tools: true or false (default false)");
  cmd->add_option("--extend-multi", f.extend_multi, "Extended API list in multi-tool reranking (default false)");
  cmd->add_option("--classifier", f.classifier, "Query type classifier: oracle, heuristic or external")
      ->check(CLI::IsMember({"oracle", "heuristic", "external"}));
  cmd->add_option("--classifications", f.classifications, "Labels TSV for --classifier external");
  cmd->add_option("--similarity", f.similarity, "Doc similarity source: doc_embedding or external_matrix")
      ->check(CLI::IsMember({"doc_embedding", "external_matrix"}));
  cmd->add_option("--similarity-matrix", f.similarity_matrix, "Similarity TSV for external_matrix");
  cmd->add_option("--jobs", f.jobs, "Parallel query workers")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_flag("--allow-inverted", f.allow_inverted, "Accept m_s > m_u");
}

RerankConfig resolve_config(const EngineFlags& f) {
  RerankConfig cfg;
  if (!f.config.empty()) apply_config_file(cfg, f.config);
  if (f.k) cfg.k = *f.k;
  if (f.m) cfg.m = *f.m;
  if (f.m_s) cfg.m_s = *f.m_s;
  if (f.m_u) cfg.m_u = *f.m_u;
  if (f.tau_s) cfg.tau_s = *f.tau_s;
  if (f.tau_m) cfg.tau_m = *f.tau_m;
  if (f.n) cfg.n = *f.n;
  if (f.extend_unseen) cfg.extend_unseen = *f.extend_unseen;
  if (f.extend_seen) cfg.extend_seen = *f.extend_seen;
  if (f.extend_multi) cfg.extend_multi = *f.extend_multi;
  if (!f.classifier.empty()) cfg.classifier_policy = parse_classifier_policy(f.classifier);
  if (!f.similarity.empty()) cfg.similarity_source = parse_similarity_source(f.similarity);
  return cfg;
}

/// Owns every collaborator a pipeline run may need.
struct Engine {
  ToolLibrary library;
  std::vector<PipelineQuery> queries;
  std::vector<EvalRecord> records;
  std::optional<EmbeddingStore> embeddings;
  std::optional<InvertedIndex> index;
  std::unique_ptr<CoarseRetriever> retriever;
  LexicalOverlapScorer lexical;
  std::optional<ScoreCache> cache;
  std::optional<OracleScorer> oracle;
  const RelevanceScorer* scorer = nullptr;
  std::unique_ptr<QueryClassifier> classifier;
  std::optional<EmbeddingDocSimilarity> embedding_sim;
  std::optional<MatrixDocSimilarity> matrix_sim;
  const DocSimilarity* doc_sim = nullptr;

  PipelineComponents components() const {
    return {&library, retriever.get(), scorer, classifier.get(), doc_sim};
  }
};

void build_engine(Engine& e, const EngineFlags& f, const RerankConfig& cfg, Mode mode, bool need_records) {
  e.library = load_library(f.library);
  if (need_records) {
    e.records = load_records(f.queries, &e.library);
    e.queries = to_pipeline_queries(e.records);
  } else {
    e.queries = load_queries(f.queries);
  }

  if (!f.embeddings.empty()) e.embeddings = EmbeddingStore::load(f.embeddings);
  const bool use_bm25 = mode == Mode::bm25 || f.retriever == "bm25";
  if (use_bm25) {
    e.index = InvertedIndex::build(e.library);
    e.retriever = std::make_unique<Bm25Retriever>(*e.index);
  } else {
    if (!e.embeddings) throw ConfigError("dense retrieval needs --embeddings");
    e.retriever = std::make_unique<DenseRetriever>(*e.embeddings, e.library);
  }

  std::string scorer = f.scorer.empty() ? (f.scores.empty() ? "lexical" : "cache") : f.scorer;
  if (scorer == "cache") {
    if (f.scores.empty()) throw ConfigError("--scorer cache needs --scores");
    e.cache = ScoreCache::load(f.scores);
    if (f.score_miss == "lexical") e.cache->set_fallback(&e.lexical);
    e.scorer = &*e.cache;
  } else if (scorer == "oracle") {
    if (!f.seed) throw ConfigError("--scorer oracle needs --seed");
    if (e.records.empty()) e.records = load_records(f.queries, &e.library);
    e.oracle = OracleScorer::from_records(e.records, f.oracle_noise, *f.seed);
    e.scorer = &*e.oracle;
  } else {
    e.scorer = &e.lexical;
  }

  if (cfg.classifier_policy == ClassifierPolicy::external) {
    if (f.classifications.empty()) throw ConfigError("--classifier external needs --classifications");
    e.classifier = std::make_unique<LabelClassifier>(LabelClassifier::load(f.classifications));
  } else {
    e.classifier = std::make_unique<HeuristicClassifier>();
  }

  if (cfg.similarity_source == SimilaritySource::external_matrix) {
    if (f.similarity_matrix.empty()) throw ConfigError("--similarity external_matrix needs --similarity-matrix");
    e.matrix_sim = MatrixDocSimilarity::load(f.similarity_matrix);
    e.doc_sim = &*e.matrix_sim;
  } else if (e.embeddings) {
    e.embedding_sim.emplace(*e.embeddings);
    e.doc_sim = &*e.embedding_sim;
  }
}

int cmd_synth(const SynthSpec& spec, const std::string& out) {
  generate_synthetic_benchmark(spec).save(out);
  std::cout << "wrote " << out << "/library.jsonl, queries.jsonl, dev_queries.jsonl, embeddings.tsv\n";
  return 0;
}

int cmd_index(const std::string& library_path, const std::string& out) {
  const auto library = load_library(library_path);
  const auto index = InvertedIndex::build(library);
  auto file = open_out(out);
  index.write_json(file);
  return 0;
}

int cmd_retrieve(const EngineFlags& f, const std::string& out) {
  const auto library = load_library(f.library);
  const auto queries = load_queries(f.queries);
  std::optional<EmbeddingStore> store;
  std::optional<InvertedIndex> index;
  std::unique_ptr<CoarseRetriever> retriever;
  if (f.retriever == "bm25") {
    index = InvertedIndex::build(library);
    retriever = std::make_unique<Bm25Retriever>(*index);
  } else {
    if (f.embeddings.empty()) throw ConfigError("dense retrieval needs --embeddings");
    store = EmbeddingStore::load(f.embeddings);
    retriever = std::make_unique<DenseRetriever>(*store, library);
  }
  const std::size_t m = f.m.value_or(50);
  if (m == 0) throw ConfigError("--m must be positive");
  auto file = open_out(out);
  for (const auto& q : queries) {
    json candidates = json::array();
    for (const auto& c : retriever->retrieve(q.ref(), m))
      candidates.push_back({{"api_id", c.api_id}, {"score", c.retrieval_score}, {"rank", c.coarse_rank}});
    file << json{{"query_id", q.query_id}, {"retriever", retriever->name()}, {"candidates", candidates}}.dump()
         << '\n';
  }
  return 0;
}

int cmd_rerank(const EngineFlags& f, const std::string& out, bool trace) {
  const Mode mode = parse_mode(f.mode);
  const RerankConfig cfg = resolve_config(f);
  validate_for_mode(cfg, mode, f.allow_inverted);
  const bool need_records = mode == Mode::toolrerank_oracle || cfg.classifier_policy == ClassifierPolicy::oracle;
  Engine e;
  build_engine(e, f, cfg, mode, need_records);
  const auto results = run_batch(e.queries, cfg, e.components(), mode, f.jobs, f.allow_inverted);
  auto file = open_out(out);
  write_results(results, file, trace);
  return 0;
}

int cmd_eval(const std::string& results_path, const std::string& qrels_path, std::size_t k, const std::string& out,
             const std::string& csv) {
  const auto results = load_results(results_path);
  const auto records = load_records(qrels_path);
  const auto report = evaluate(results, records, k);
  ReportTable table{"Recall@" + std::to_string(k) + " / NDCG@" + std::to_string(k), subset_column_order(records),
                    {{"results", report}}};
  table.write_text(std::cout);
  auto pair = [](const MetricPair& m) { return json{{"ndcg", m.ndcg}, {"recall", m.recall}}; };
  auto opt = [&](const std::optional<MetricPair>& m) { return m ? pair(*m) : json(nullptr); };
  json doc = {{"k", k},
              {"queries", results.size()},
              {"all_average", pair(report.all_average)},
              {"seen_average", opt(report.seen_average)},
              {"unseen_average", opt(report.unseen_average)},
              {"single_tool_average", opt(report.single_tool_average)},
              {"multi_tool_average", opt(report.multi_tool_average)},
              {"query_mean", pair(report.query_mean)},
              {"per_subset", json::object()},
              {"per_query", json::object()}};
  for (const auto& [s, m] : report.per_subset) {
    doc["per_subset"][s] = pair(m);
    doc["per_subset"][s]["queries"] = report.subset_sizes.at(s);
  }
  for (const auto& [q, m] : report.per_query) doc["per_query"][q] = pair(m);
  if (!out.empty()) {
    auto file = open_out(out);
    file << doc.dump(2) << '\n';
  }
  if (!csv.empty()) {
    auto file = open_out(csv);
    table.write_csv(file);
  }
  return 0;
}

std::vector<double> parse_doubles(const std::vector<std::string>& items, const char* flag) {
  std::vector<double> out;
  for (const auto& s : items) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(s, &used));
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw ConfigError(std::string(flag) + ": not a number: '" + s + "'");
    }
  }
  return out;
}

struct GridFlags {
  std::vector<std::size_t> m_s{10, 30, 50};
  std::vector<std::size_t> m_u{10, 30, 50};
  std::vector<std::string> tau_s{"0.6", "0.65", "0.7", "0.75", "0.8", "0.85", "0.9"};
  std::vector<std::string> tau_m{"0.6", "0.65", "0.7", "0.75", "0.8", "0.85", "0.9"};
  std::vector<std::size_t> n{2, 3, 4};
  std::string objective = "recall";
  std::string best_out;
  std::string csv;
};

int cmd_grid(const EngineFlags& f, const GridFlags& g, const std::string& out) {
  const Mode mode = parse_mode(f.mode);
  RerankConfig base = resolve_config(f);
  GridSpec grid;
  grid.m_s = g.m_s;
  grid.m_u = g.m_u;
  grid.tau_s = parse_doubles(g.tau_s, "--grid-tau-s");
  grid.tau_m = parse_doubles(g.tau_m, "--grid-tau-m");
  grid.n = g.n;
  grid.allow_inverted_truncation = f.allow_inverted;
  for (auto v : grid.m_s) base.m = std::max(base.m, v);
  for (auto v : grid.m_u) base.m = std::max(base.m, v);
  Engine e;
  build_engine(e, f, base, mode, true);
  const auto result = grid_search(e.records, grid, base, e.components(), mode,
                                  g.objective == "ndcg" ? Objective::mean_ndcg : Objective::mean_recall, f.jobs);
  {
    auto file = open_out(out);
    result.write_json(file);
  }
  if (!g.csv.empty()) {
    auto file = open_out(g.csv);
    result.write_csv(file);
  }
  if (!g.best_out.empty()) {
    auto file = open_out(g.best_out);
    const auto& b = result.best;
    file << json{{"m_s", b.m_s},
                 {"m_u", b.m_u},
                 {"tau_s", b.tau_s},
                 {"tau_m", b.tau_m},
                 {"n", b.n},
                 {"k", b.k},
                 {"m", b.m},
                 {"extend_unseen", b.extend_unseen},
                 {"extend_seen", b.extend_seen},
                 {"extend_multi", b.extend_multi},
                 {"classifier_policy", std::string(to_string(b.classifier_policy))},
                 {"similarity_source", std::string(to_string(b.similarity_source))}}
                .dump(2)
         << '\n';
  }
  std::cout << "evaluated " << result.table.size() << " of " << result.raw_combinations
            << " combinations; best m_s=" << result.best.m_s << " m_u=" << result.best.m_u
            << " tau_s=" << result.best.tau_s << " tau_m=" << result.best.tau_m << " n=" << result.best.n
            << " objective=" << result.best_objective << '\n';
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"toolrank: hierarchy-aware tool retrieval and reranking"};
  app.require_subcommand(1);
  app.footer(kFormats);

  SynthSpec spec;
  std::string synth_out;
  std::size_t per_subset = 10;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic benchmark");
  synth->add_option("--seed", synth_seed, "Random seed")->required();
  synth->add_option("--tools", spec.tools, "Number of tools")->capture_default_str();
  synth->add_option("--apis-per-tool", spec.apis_per_tool, "APIs per tool")->capture_default_str();
  synth->add_option("--categories", spec.categories, "Number of categories")->capture_default_str();
  synth->add_option("--clusters", spec.clusters, "Clusters of near-duplicate tools")->capture_default_str();
  synth->add_option("--cluster-size", spec.cluster_size, "Tools per cluster")->capture_default_str();
  synth->add_option("--seen-fraction", spec.seen_fraction, "Fraction of seen tools")->capture_default_str();
  synth->add_option("--queries-per-subset", per_subset, "Evaluation queries per subset")->capture_default_str();
  synth->add_option("--dev-queries", spec.dev_queries, "Dev queries for grid search")->capture_default_str();
  synth->add_option("--gold-rank-limit", spec.gold_rank_limit,
                    "Keep every gold API within this many dense results (0 = off)")
      ->capture_default_str();
  synth->add_option("--out", synth_out, "Output directory")->required();

  std::string index_library, index_out;
  auto* index = app.add_subcommand("index", "Build the BM25 inverted index of a library");
  index->add_option("--library", index_library, "Tool library (JSON Lines)")->required();
  index->add_option("--out", index_out, "Index JSON output path")->required();

  EngineFlags retrieve_flags;
  std::string retrieve_out;
  auto* retrieve = app.add_subcommand("retrieve", "Coarse retrieval only");
  retrieve->add_option("--library", retrieve_flags.library, "Tool library (JSON Lines)")->required();
  retrieve->add_option("--queries", retrieve_flags.queries, "Queries file (JSON Lines)")->required();
  retrieve->add_option("--embeddings", retrieve_flags.embeddings, "Embedding file (dense retriever)");
  retrieve->add_option("--retriever", retrieve_flags.retriever, "dense or bm25")
      ->check(CLI::IsMember({"dense", "bm25"}))
      ->capture_default_str();
  retrieve->add_option("--m", retrieve_flags.m, "Candidates per query (default 50)");
  retrieve->add_option("--out", retrieve_out, "Candidates JSON Lines output")->required();

  EngineFlags rerank_flags;
  std::string rerank_out;
  bool trace = false;
  auto* rerank = app.add_subcommand("rerank", "Run the retrieval and reranking pipeline");
  add_engine_flags(rerank, rerank_flags, true);
  rerank->add_option("--out", rerank_out, "Results JSON Lines output")->required();
  rerank->add_flag("--trace", trace, "Include per-stage traces in the results");

  std::string results_path, qrels_path, eval_out, eval_csv;
  std::size_t eval_k = 5;
  auto* eval = app.add_subcommand("eval", "Score results against gold records");
  eval->add_option("--results", results_path, "Results JSON Lines")->required();
  eval->add_option("--qrels", qrels_path, "Queries file with gold_api_ids")->required();
  eval->add_option("--k", eval_k, "Cutoff")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--out", eval_out, "Report JSON output");
  eval->add_option("--csv", eval_csv, "Report CSV output (values x100)");

  EngineFlags grid_flags;
  GridFlags grid_axes;
  std::string grid_out;
  auto* grid = app.add_subcommand("grid-search", "Exhaustive hyperparameter search on dev queries");
  add_engine_flags(grid, grid_flags, false);
  grid->add_option("--grid-m-s", grid_axes.m_s, "m_s axis")->capture_default_str();
  grid->add_option("--grid-m-u", grid_axes.m_u, "m_u axis")->capture_default_str();
  grid->add_option("--grid-tau-s", grid_axes.tau_s, "tau_s axis")->capture_default_str();
  grid->add_option("--grid-tau-m", grid_axes.tau_m, "tau_m axis")->capture_default_str();
  grid->add_option("--grid-n", grid_axes.n, "n axis")->capture_default_str();
  grid->add_option("--objective", grid_axes.objective, "recall or ndcg")
      ->check(CLI::IsMember({"recall", "ndcg"}))
      ->capture_default_str();
  grid->add_option("--out", grid_out, "Grid JSON output (best config and full table)")->required();
  grid->add_option("--csv", grid_axes.csv, "Grid table CSV output");
  grid->add_option("--best-config", grid_axes.best_out, "Best config JSON, usable with --config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* failing = &app;
    for (auto* sub : app.get_subcommands()) failing = sub;
    std::cerr << failing->help();
    return 2;
  }

  if (synth->parsed()) {
    spec.seed = synth_seed;
    for (auto& [label, count] : spec.queries_per_subset) count = per_subset;
    return cmd_synth(spec, synth_out);
  }
  if (index->parsed()) return cmd_index(index_library, index_out);
  if (retrieve->parsed()) return cmd_retrieve(retrieve_flags, retrieve_out);
  if (rerank->parsed()) return cmd_rerank(rerank_flags, rerank_out, trace);
  if (eval->parsed()) return cmd_eval(results_path, qrels_path, eval_k, eval_out, eval_csv);
  if (grid->parsed()) return cmd_grid(grid_flags, grid_axes, grid_out);
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const toolrank::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
