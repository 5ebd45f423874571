#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string output;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(TOOLRANK_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "toolrank_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// A seeded benchmark generated once for the tests below.
fs::path bench_dir() {
  static const fs::path dir = [] {
    const auto d = workdir() / "bench";
    const auto r = run("synth --seed 7 --tools 100 --queries-per-subset 5 --dev-queries 6 --out " + d.string());
    EXPECT_EQ(r.code, 0) << r.output;
    return d;
  }();
  return dir;
}

std::string inputs() {
  const auto b = bench_dir();
  return "--library " + (b / "library.jsonl").string() + " --queries " + (b / "queries.jsonl").string() +
         " --embeddings " + (b / "embeddings.tsv").string();
}

}  // namespace

TEST(Cli, HelpExitsZeroAndListsSubcommands) {
  const auto r = run("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"synth", "index", "retrieve", "rerank", "eval", "grid-search"})
    EXPECT_NE(r.output.find(sub), std::string::npos) << sub;
}

TEST(Cli, UsageErrorExitsTwo) {
  EXPECT_EQ(run("rerank --mode toolrerank").code, 2);
  EXPECT_EQ(run("no-such-command").code, 2);
  EXPECT_EQ(run("eval --results x --qrels y --k zero").code, 2);
}

TEST(Cli, DataErrorExitsOne) {
  const auto bad = workdir() / "bad.jsonl";
  std::ofstream(bad) << "{not json\n";
  const auto r = run("index --library " + bad.string() + " --out " + (workdir() / "idx.json").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("error:"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("bad.jsonl:1"), std::string::npos) << r.output;
}

TEST(Cli, InvalidConfigExitsOne) {
  const auto r = run("rerank " + inputs() + " --m-s 30 --m-u 10 --out " + (workdir() / "x.jsonl").string());
  EXPECT_EQ(r.code, 1) << r.output;
}

TEST(Cli, SynthIsDeterministic) {
  const auto a = workdir() / "synth_a", b = workdir() / "synth_b";
  ASSERT_EQ(run("synth --seed 7 --tools 100 --out " + a.string()).code, 0);
  ASSERT_EQ(run("synth --seed 7 --tools 100 --out " + b.string()).code, 0);
  for (const char* f : {"library.jsonl", "queries.jsonl", "embeddings.tsv"}) {
    EXPECT_FALSE(slurp(a / f).empty()) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Cli, IndexAndRetrieve) {
  const auto b = bench_dir();
  const auto idx = workdir() / "index.json";
  ASSERT_EQ(run("index --library " + (b / "library.jsonl").string() + " --out " + idx.string()).code, 0);
  EXPECT_NO_THROW(nlohmann::json::parse(slurp(idx)));
  const auto out = workdir() / "cands.jsonl";
  const auto r = run("retrieve " + inputs() + " --retriever bm25 --m 7 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  std::istringstream lines(slurp(out));
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["candidates"].size(), 7u);
    ++count;
  }
  EXPECT_EQ(count, 30);
}

TEST(Cli, RerankMMatchesToolRerankNone) {
  const auto a = workdir() / "rerank_m.jsonl", b = workdir() / "none.jsonl";
  ASSERT_EQ(run("rerank " + inputs() + " --mode rerank_m --m 10 --out " + a.string()).code, 0);
  ASSERT_EQ(run("rerank " + inputs() + " --mode toolrerank_none --m 10 --m-s 10 --m-u 10 --out " + b.string()).code, 0);
  EXPECT_FALSE(slurp(a).empty());
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST(Cli, EvalReportHasAllAverage) {
  const auto res = workdir() / "results.jsonl", rep = workdir() / "report.json", csv = workdir() / "report.csv";
  ASSERT_EQ(run("rerank " + inputs() + " --trace --out " + res.string()).code, 0);
  const auto first = nlohmann::json::parse(slurp(res).substr(0, slurp(res).find('\n')));
  EXPECT_TRUE(first.contains("trace"));
  const auto r = run("eval --results " + res.string() + " --qrels " + (bench_dir() / "queries.jsonl").string() +
                     " --k 5 --out " + rep.string() + " --csv " + csv.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const auto j = nlohmann::json::parse(slurp(rep));
  EXPECT_TRUE(j.contains("all_average"));
  EXPECT_TRUE(j["all_average"].contains("recall"));
  EXPECT_TRUE(j["all_average"].contains("ndcg"));
  EXPECT_FALSE(slurp(csv).empty());
}

TEST(Cli, GridSearchWritesBestConfig) {
  const auto b = bench_dir();
  const auto out = workdir() / "grid.json", best = workdir() / "best.json";
  const std::string args = "grid-search --library " + (b / "library.jsonl").string() + " --queries " +
                           (b / "dev_queries.jsonl").string() + " --embeddings " + (b / "embeddings.tsv").string() +
                           " --grid-m-s 10 --grid-m-u 10 50 --grid-tau-s 0.85 --grid-tau-m 0.7 --grid-n 2 3" +
                           " --out " + out.string() + " --best-config " + best.string();
  const auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.output;
  const auto j = nlohmann::json::parse(slurp(out));
  EXPECT_EQ(j["table"].size(), 4u);
  const auto res = workdir() / "best_results.jsonl";
  EXPECT_EQ(run("rerank " + inputs() + " --config " + best.string() + " --out " + res.string()).code, 0);
}

TEST(Cli, OracleScorerNeedsSeed) {
  const auto r = run("rerank " + inputs() + " --scorer oracle --out " + (workdir() / "o.jsonl").string());
  EXPECT_NE(r.code, 0);
}
