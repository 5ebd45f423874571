#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "toolrank/embedding.hpp"
#include "toolrank/error.hpp"
#include "toolrank/retrieval.hpp"
#include "toolrank/synth.hpp"
#include "toolrank/tokenizer.hpp"

using namespace toolrank;

namespace {

InvertedIndex three_docs() {
  return InvertedIndex::build({{"d1", "alpha beta alpha"}, {"d2", "beta gamma"}, {"d3", "gamma delta delta epsilon"}});
}

// Okapi BM25 written out for one term in one document.
double okapi_term(double N, double n, double tf, double len, double avg) {
  const double k1 = 1.2, b = 0.75;
  const double idf = std::log(1.0 + (N - n + 0.5) / (n + 0.5));
  return idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len / avg));
}

}  // namespace

TEST(Tokenizer, LowercasesAndSplitsOnNonAlphanumerics) {
  EXPECT_EQ(tokenize("Get_Weather | Paris, 2024!"), (std::vector<std::string>{"get", "weather", "paris", "2024"}));
  EXPECT_TRUE(tokenize("  --  ").empty());
}

TEST(InvertedIndex, SingleDocumentPostings) {
  const auto index = InvertedIndex::build({{"d1", "alpha beta alpha"}});
  ASSERT_NE(index.find("alpha"), nullptr);
  EXPECT_EQ(*index.find("alpha"), (std::vector<Posting>{{"d1", 2}}));
  EXPECT_EQ(index.doc_lengths().at("d1"), 3u);
  EXPECT_DOUBLE_EQ(index.avg_doc_length(), 3.0);
}

TEST(InvertedIndex, EmptyDescriptionStillIndexedByName) {
  const auto lib = ToolLibrary::build({{"t1", "WeatherAPI", "Weather", {"a1"}}},
                                      {{"a1", "t1", "get_weather", "", ""}}, {});
  const auto index = InvertedIndex::build(lib);
  ASSERT_NE(index.find("weatherapi"), nullptr);
  ASSERT_NE(index.find("get"), nullptr);
  EXPECT_EQ(index.doc_lengths().at("a1"), 4u);
}

TEST(InvertedIndex, TermFrequenciesSumToDocumentLengthsOnSyntheticCorpus) {
  SynthSpec spec;
  spec.seed = 2;
  const auto bench = generate_synthetic_benchmark(spec);
  const auto index = InvertedIndex::build(bench.library);
  std::map<std::string, std::size_t> recount;
  for (const auto& [term, list] : index.postings())
    for (const auto& p : list) recount[p.api_id] += p.term_frequency;
  ASSERT_EQ(recount.size(), bench.library.api_count());
  for (const auto& [id, len] : index.doc_lengths()) {
    EXPECT_EQ(recount[id], len) << id;
    EXPECT_EQ(len, tokenize(bench.library.api(id).document_text).size()) << id;
  }
}

TEST(InvertedIndex, JsonRoundTrip) {
  const auto index = three_docs();
  std::stringstream s;
  index.write_json(s);
  EXPECT_EQ(InvertedIndex::read_json(s, "index.json"), index);
}

TEST(Bm25, MatchesHandAppliedOkapiFormula) {
  const auto index = three_docs();
  const std::vector<std::string> q{"alpha", "gamma"};
  const double avg = 3.0;
  EXPECT_NEAR(bm25_score(index, q, "d1"), okapi_term(3, 1, 2, 3, avg), 1e-9);
  EXPECT_NEAR(bm25_score(index, q, "d2"), okapi_term(3, 2, 1, 2, avg), 1e-9);
  EXPECT_NEAR(bm25_score(index, q, "d3"), okapi_term(3, 2, 1, 4, avg), 1e-9);
  EXPECT_NEAR(bm25_score(index, q, "d1"), 1.3486399, 1e-6);

  const auto ranked = bm25_retrieve(index, "alpha gamma", 3);
  ASSERT_EQ(ranked.size(), 3u);
  EXPECT_EQ(ranked[0].api_id, "d1");
  EXPECT_EQ(ranked[1].api_id, "d2");
  EXPECT_EQ(ranked[2].api_id, "d3");
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    EXPECT_EQ(ranked[i].coarse_rank, i + 1);
    EXPECT_NEAR(ranked[i].retrieval_score, bm25_score(index, q, ranked[i].api_id), 1e-12);
  }
}

TEST(Bm25, NoSharedTermScoresZero) {
  const auto index = three_docs();
  for (const auto& c : bm25_retrieve(index, "zeta omega", 3)) EXPECT_EQ(c.retrieval_score, 0.0);
  Bm25Params strict;
  strict.strict = true;
  EXPECT_TRUE(bm25_retrieve(index, "zeta omega", 3, strict).empty());
}

TEST(Bm25, RepeatingAMatchingTermNeverLowersScore) {
  SynthSpec spec;
  spec.seed = 3;
  const auto bench = generate_synthetic_benchmark(spec);
  const auto index = InvertedIndex::build(bench.library);
  std::mt19937_64 rng(17);
  std::vector<std::string> ids;
  for (const auto& [id, api] : bench.library.apis()) ids.push_back(id);
  for (int trial = 0; trial < 200; ++trial) {
    const auto& id = ids[rng() % ids.size()];
    const auto doc_terms = tokenize(bench.library.api(id).document_text);
    std::vector<std::string> q{doc_terms[rng() % doc_terms.size()], "unrelated"};
    double prev = bm25_score(index, q, id);
    for (int rep = 0; rep < 4; ++rep) {
      q.push_back(q.front());
      const double next = bm25_score(index, q, id);
      EXPECT_GE(next, prev);
      prev = next;
    }
  }
}

TEST(Bm25, ZeroDepthIsConfigError) { EXPECT_THROW(bm25_retrieve(three_docs(), "alpha", 0), ConfigError); }

TEST(Cosine, HandValues) {
  const std::vector<double> a{1, 2, 2}, b{2, 1, 2};
  EXPECT_NEAR(cosine_sim(a, b), 8.0 / 9.0, 1e-12);
  EXPECT_NEAR(cosine_sim(a, a), 1.0, 1e-12);
  const std::vector<double> x{1, 0}, y{0, 3};
  EXPECT_NEAR(cosine_sim(x, y), 0.0, 1e-12);
}

TEST(Cosine, RejectsMismatchAndZeroVectors) {
  const std::vector<double> a{1, 2}, b{1, 2, 3}, z{0, 0};
  EXPECT_THROW(cosine_sim(a, b), Error);
  EXPECT_THROW(cosine_sim(a, z), Error);
}

TEST(EmbeddingStore, TextAndJsonLinesFormats) {
  std::istringstream text("dim=2\nq\t1 0\na1\t0.6 0.8\n");
  const auto store = EmbeddingStore::read(text, "e.tsv");
  EXPECT_EQ(store.dimension(), 2u);
  EXPECT_EQ(store.size(), 2u);
  std::istringstream jsonl("{\"id\":\"q\",\"vec\":[1,0]}\n{\"id\":\"a1\",\"vec\":[0.6,0.8]}\n");
  const auto store2 = EmbeddingStore::read(jsonl, "e.jsonl");
  EXPECT_EQ(store, store2);
  std::stringstream out;
  store.write(out);
  EXPECT_EQ(EmbeddingStore::read(out, "again"), store);
}

TEST(EmbeddingStore, RejectsWrongLengthAndDuplicates) {
  EmbeddingStore s(2);
  s.add("a", {1, 0});
  EXPECT_THROW(s.add("a", {0, 1}), Error);
  EXPECT_THROW(s.add("b", {1, 0, 0}), Error);
  EXPECT_THROW(s.add("c", {0, 0}), Error);
}

TEST(DenseRetrieve, IdentityVectorComesFirst) {
  const auto lib = ToolLibrary::build({{"t1", "T", "C", {"a1", "a2"}}},
                                      {{"a1", "t1", "x", "d", ""}, {"a2", "t1", "y", "e", ""}}, {});
  EmbeddingStore store(2);
  store.add("a1", {0.0, 1.0});
  store.add("a2", {1.0, 0.2});
  store.add("q", {0.0, 2.0});
  const auto top = dense_retrieve(store, "q", lib, 1);
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0].api_id, "a1");
  EXPECT_NEAR(top[0].retrieval_score, 1.0, 1e-12);
  EXPECT_EQ(dense_retrieve(store, "q", lib, 10).size(), 2u);
  EXPECT_THROW(dense_retrieve(store, "missing", lib, 1), LookupError);
}

TEST(DenseRetrieve, EqualsFullSortOfCosines) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> normal;
  std::vector<Tool> tools;
  std::vector<ApiDoc> apis;
  EmbeddingStore store(8);
  for (int t = 0; t < 10; ++t) {
    Tool tool{"t" + std::to_string(t), "T" + std::to_string(t), "C", {}};
    for (int a = 0; a < 5; ++a) {
      const std::string id = "a" + std::to_string(t * 5 + a);
      tool.api_ids.push_back(id);
      apis.push_back({id, tool.tool_id, "n" + id, "d", ""});
      std::vector<double> v(8);
      for (auto& x : v) x = normal(rng);
      store.add(id, v);
    }
    tools.push_back(tool);
  }
  const auto lib = ToolLibrary::build(tools, apis, {});
  std::vector<double> qv(8);
  for (auto& x : qv) x = normal(rng);
  store.add("q", qv);

  std::vector<std::pair<double, std::string>> brute;
  for (const auto& [id, api] : lib.apis()) brute.push_back({-cosine_sim(store.vector("q"), store.vector(id)), id});
  std::sort(brute.begin(), brute.end());
  const auto ranked = dense_retrieve(store, "q", lib, 50);
  ASSERT_EQ(ranked.size(), 50u);
  std::set<std::string> unique;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    EXPECT_EQ(ranked[i].api_id, brute[i].second);
    EXPECT_EQ(ranked[i].coarse_rank, i + 1);
    unique.insert(ranked[i].api_id);
  }
  EXPECT_EQ(unique.size(), 50u);
}
