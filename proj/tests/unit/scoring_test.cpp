#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "toolrank/embedding.hpp"
#include "toolrank/error.hpp"
#include "toolrank/scoring.hpp"
#include "toolrank/synth.hpp"

using namespace toolrank;

TEST(LexicalScore, FullOverlapIsSigmaFour) {
  EXPECT_NEAR(lexical_overlap_score("weather paris", "Weather | WeatherAPI | get | Paris weather."), 0.9820137900, 1e-9);
}

TEST(LexicalScore, NoOverlapIsSigmaMinusFour) {
  EXPECT_NEAR(lexical_overlap_score("movie cast", "Weather | WeatherAPI"), 0.0179862100, 1e-9);
}

TEST(LexicalScore, HalfOverlapIsOneHalf) {
  EXPECT_NEAR(lexical_overlap_score("weather movie", "weather today"), 0.5, 1e-12);
}

TEST(LexicalScore, UsesTokenSets) {
  EXPECT_DOUBLE_EQ(lexical_overlap_score("weather weather movie", "weather"),
                   lexical_overlap_score("weather movie", "weather"));
  EXPECT_NEAR(lexical_overlap_score("", "anything"), 1.0 / (1.0 + std::exp(4.0)), 1e-12);
}

TEST(ScoreCache, EchoesStoredScore) {
  ScoreCache cache;
  cache.put("q1", "a1", 0.92);
  EXPECT_DOUBLE_EQ(cached_score(cache, "q1", "a1"), 0.92);
  EXPECT_TRUE(cache.contains("q1", "a1"));
  EXPECT_FALSE(cache.contains("q1", "a2"));
}

TEST(ScoreCache, MissNamesThePair) {
  ScoreCache cache;
  cache.put("q1", "a1", 0.5);
  try {
    cached_score(cache, "q7", "a3");
    FAIL();
  } catch (const LookupError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("q7"), std::string::npos);
    EXPECT_NE(msg.find("a3"), std::string::npos);
  }
}

TEST(ScoreCache, RejectsOutOfRangeAndMalformedRows) {
  ScoreCache cache;
  EXPECT_THROW(cache.put("q", "a", 1.5), Error);
  std::istringstream bad_range("q1\ta1\t1.2\n");
  EXPECT_THROW(ScoreCache::read(bad_range, "s.tsv"), DataError);
  std::istringstream bad_cols("q1\ta1\n");
  EXPECT_THROW(ScoreCache::read(bad_cols, "s.tsv"), DataError);
  std::istringstream bad_num("q1\ta1\tabc\n");
  EXPECT_THROW(ScoreCache::read(bad_num, "s.tsv"), DataError);
}

TEST(ScoreCache, WriteReadReplaysExactly) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ScoreCache cache;
  for (int i = 0; i < 200; ++i) cache.put("q" + std::to_string(i % 13), "a" + std::to_string(i), unit(rng));
  std::stringstream s;
  cache.write(s);
  const auto back = ScoreCache::read(s, "s.tsv");
  ASSERT_EQ(back.size(), cache.size());
  for (int i = 0; i < 200; ++i) {
    const auto q = "q" + std::to_string(i % 13), a = "a" + std::to_string(i);
    EXPECT_EQ(cached_score(back, q, a), cached_score(cache, q, a));
  }
}

TEST(ScoreCache, LexicalFallbackAgreesWithDirectCalls) {
  SynthSpec spec;
  spec.seed = 12;
  const auto bench = generate_synthetic_benchmark(spec);
  LexicalOverlapScorer lexical;
  ScoreCache cache;
  cache.set_fallback(&lexical);
  EXPECT_EQ(cache.policy(), MissPolicy::fallback_scorer);
  std::vector<const ApiDoc*> apis;
  for (const auto& [id, api] : bench.library.apis()) apis.push_back(&api);
  std::mt19937_64 rng(99);
  for (int i = 0; i < 1000; ++i) {
    const auto& r = bench.records[rng() % bench.records.size()];
    const auto* api = apis[rng() % apis.size()];
    const ScoreRequest req{{r.query_id, r.query_text}, api->api_id, api->document_text};
    EXPECT_EQ(cache.score(req), lexical.score(req));
  }
}

TEST(OracleScorer, GoldIsOneAndNoiseStaysBelowCeiling) {
  std::map<std::string, std::set<std::string>, std::less<>> gold{{"q1", {"a1", "a2"}}};
  const OracleScorer scorer(gold, 0.3, 5);
  EXPECT_EQ(scorer.score({{"q1", ""}, "a1", ""}), 1.0);
  for (int i = 3; i < 500; ++i) {
    const double s = scorer.score({{"q1", ""}, "a" + std::to_string(i), ""});
    EXPECT_GE(s, 0.0);
    EXPECT_LT(s, 0.3);
  }
  EXPECT_THROW(scorer.score({{"q9", ""}, "a1", ""}), LookupError);
  EXPECT_THROW(OracleScorer(gold, 0.5, 1), ConfigError);
}

TEST(OracleScorer, SameSeedSameScores) {
  std::map<std::string, std::set<std::string>, std::less<>> gold{{"q1", {"a1"}}, {"q2", {"a2"}}};
  const OracleScorer a(gold, 0.4, 8), b(gold, 0.4, 8), c(gold, 0.4, 9);
  int differ = 0;
  for (int i = 0; i < 300; ++i) {
    const std::string api = "a" + std::to_string(i);
    for (const char* q : {"q1", "q2"}) {
      EXPECT_EQ(a.score({{q, ""}, api, ""}), b.score({{q, ""}, api, ""}));
      differ += a.score({{q, ""}, api, ""}) != c.score({{q, ""}, api, ""});
    }
  }
  EXPECT_GT(differ, 0);
}

TEST(MemoizingScorer, ReturnsInnerScores) {
  LexicalOverlapScorer lexical;
  MemoizingScorer memo(lexical);
  const ScoreRequest req{{"q", "weather paris"}, "a1", "weather in paris"};
  EXPECT_EQ(memo.score(req), lexical.score(req));
  EXPECT_EQ(memo.score(req), lexical.score(req));
}

TEST(DocSimilarity, EmbeddingIdentityOrthogonalityAndCrossCheck) {
  EmbeddingStore store(3);
  store.add("x", {1, 0, 0});
  store.add("y", {0, 2, 0});
  const EmbeddingDocSimilarity sim(store);
  EXPECT_NEAR(sim.sim("x", "x"), 1.0, 1e-12);
  EXPECT_NEAR(sim.sim("x", "y"), 0.0, 1e-12);
  EXPECT_THROW(sim.sim("x", "nope"), LookupError);

  SynthSpec spec;
  spec.seed = 13;
  const auto bench = generate_synthetic_benchmark(spec);
  const EmbeddingDocSimilarity doc(bench.embeddings);
  std::vector<std::string> ids;
  for (const auto& [id, api] : bench.library.apis()) {
    if (ids.size() == 20) break;
    ids.push_back(id);
  }
  for (const auto& a : ids)
    for (const auto& b : ids) {
      EXPECT_NEAR(doc.sim(a, b), cosine_sim(bench.embeddings.vector(a), bench.embeddings.vector(b)), 1e-12);
      EXPECT_EQ(doc.sim(a, b), doc.sim(b, a));
    }
}

TEST(DocSimilarity, MatrixIsSymmetricSparseAndValidated) {
  std::istringstream in("a1\ta2\t0.8\na3\ta1\t-0.2\n");
  const auto m = MatrixDocSimilarity::read(in, "sim.tsv");
  EXPECT_DOUBLE_EQ(m.sim("a2", "a1"), 0.8);
  EXPECT_DOUBLE_EQ(m.sim("a1", "a3"), -0.2);
  EXPECT_DOUBLE_EQ(m.sim("a2", "a3"), 0.0);
  EXPECT_DOUBLE_EQ(m.sim("a9", "a9"), 1.0);
  std::istringstream bad("a1\ta2\t1.5\n");
  EXPECT_THROW(MatrixDocSimilarity::read(bad, "sim.tsv"), DataError);
}
