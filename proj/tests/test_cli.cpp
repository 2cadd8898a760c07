#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "test_support.hpp"
#include "xwalk/cli.hpp"
#include "xwalk/eval.hpp"

using namespace xwalk;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation cli(std::vector<std::string> args) {
  args.insert(args.begin(), "xwalk");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("xwalk_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
  static inline int counter_ = 0;
};

void write_file(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("cli_service") {
  TEST_CASE("build reports node counts by kind") {
    TempDir dir;
    write_file(dir / "log.jsonl", test::table1_log_text());
    const auto r = cli({"build", "--log", dir / "log.jsonl", "--output", dir / "g.xwg", "--extend"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("query_nodes 2\n") != std::string::npos);
    CHECK(r.out.find("listing_nodes 2\n") != std::string::npos);
    CHECK(r.out.find("shop_nodes 2\n") != std::string::npos);
    CHECK(r.out.find("tag_nodes 5\n") != std::string::npos);
    CHECK(load_graph(dir / "g.xwg").validate().ok());

    // Rebuilding gives the same bytes.
    const auto first = read_file(dir / "g.xwg");
    CHECK(cli({"build", "--log", dir / "log.jsonl", "--output", dir / "g.xwg", "--extend"}).code == kExitOk);
    CHECK(read_file(dir / "g.xwg") == first);
  }

  TEST_CASE("build failures") {
    TempDir dir;
    CHECK(cli({"build", "--log", dir / "missing.jsonl", "--output", dir / "g.xwg"}).code == kExitIo);
    write_file(dir / "bad.jsonl", test::table1_log_text() + "{broken\n");
    const auto r = cli({"build", "--log", dir / "bad.jsonl", "--output", dir / "g.xwg"});
    CHECK(r.code == kExitIo);
    CHECK(r.err.find(":4:") != std::string::npos);
    CHECK(cli({"build", "--log", dir / "log.jsonl"}).code == kExitUsage);
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitOk);
  }

  TEST_CASE("query prints results and distinguishes cold start") {
    TempDir dir;
    write_file(dir / "log.jsonl", test::table1_log_text());
    REQUIRE(cli({"build", "--log", dir / "log.jsonl", "--output", dir / "g.xwg", "--extend"}).code == kExitOk);

    const auto a = cli({"query", "--graph", dir / "g.xwg", "-q", "wedding dress", "--walks", "500"});
    CHECK(a.code == kExitOk);
    CHECK(a.out.find("l12\t") != std::string::npos);
    const auto b = cli({"query", "--graph", dir / "g.xwg", "-q", "wedding dress", "--walks", "500"});
    CHECK(a.out == b.out);

    const auto its = cli({"query", "--graph", dir / "g.xwg", "-q", "wedding gown", "--hops", "1", "--walks", "100",
                          "--sampler", "its"});
    CHECK(its.out == "l12\t100\n");

    const auto cold = cli({"query", "--graph", dir / "g.xwg", "-q", "never seen"});
    CHECK(cold.code == kExitColdStart);
    CHECK(cold.err.find("cold start: query not in graph") != std::string::npos);

    CHECK(cli({"query", "--graph", dir / "g.xwg", "-q", "wedding dress", "--hops", "2"}).code == kExitUsage);
    CHECK(cli({"query", "--graph", dir / "g.xwg", "-q", "x", "--sampler", "gibbs"}).code == kExitUsage);
    CHECK(cli({"query", "--graph", dir / "nope.xwg", "-q", "wedding dress"}).code == kExitIo);

    REQUIRE(cli({"query", "--graph", dir / "g.xwg", "-q", "wedding gown", "--hops", "1", "--run-output",
                 dir / "one.run", "--qid", "e7"})
                .code == kExitOk);
    CHECK(read_file(dir / "one.run").rfind("e7 Q0 l12 1 ", 0) == 0);
  }

  TEST_CASE("graph path from the environment") {
    TempDir dir;
    write_file(dir / "log.jsonl", test::table1_log_text());
    REQUIRE(cli({"build", "--log", dir / "log.jsonl", "--output", dir / "g.xwg"}).code == kExitOk);
    ::setenv("XWALK_GRAPH", (dir / "g.xwg").c_str(), 1);
    CHECK(cli({"query", "-q", "wedding gown", "--hops", "1"}).code == kExitOk);
    ::unsetenv("XWALK_GRAPH");
    CHECK(cli({"query", "-q", "wedding gown", "--hops", "1"}).code == kExitUsage);
  }

  TEST_CASE("eval prints the report and flags malformed runs") {
    TempDir dir;
    write_file(dir / "qrels.txt", "e1 0 a 1\ne2 0 b 1\ne3 0 c 1\n");
    write_file(dir / "freqs.txt", "e1 5\ne2 3\ne3 1\n");
    write_file(dir / "perfect.run", "e1 Q0 a 1 1 t\ne2 Q0 b 1 1 t\ne3 Q0 c 1 1 t\nzz Q0 q 1 1 t\n");
    write_file(dir / "empty.run", "");
    const auto r = cli({"eval", "--run", dir / "perfect.run", "--run", dir / "empty.run", "--qrels",
                        dir / "qrels.txt", "--freqs", dir / "freqs.txt"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("perfect.r@100=1.000000") != std::string::npos);
    CHECK(r.out.find("perfect.map@1000=1.000000") != std::string::npos);
    CHECK(r.out.find("empty.r@1000=0.000000") != std::string::npos);
    CHECK(r.out.find("perfect.r@100") < r.out.find("empty.r@100"));
    CHECK(r.err.find("warning") != std::string::npos);

    write_file(dir / "bad.run", "e1 Q0 a 1 1 t\ne2 Q0 b two 1 t\n");
    const auto bad = cli({"eval", "--run", dir / "bad.run", "--qrels", dir / "qrels.txt"});
    CHECK(bad.code == kExitIo);
    CHECK(bad.err.find("line 2") != std::string::npos);
  }

  TEST_CASE("fuse") {
    TempDir dir;
    write_file(dir / "a.run", "q Q0 x 1 9 t\nq Q0 y 2 8 t\n");
    write_file(dir / "b.run", "q Q0 u 1 9 t\nq Q0 v 2 8 t\n");

    CHECK(cli({"fuse", "--run", dir / "a.run", "--output", dir / "one.run"}).code == kExitOk);
    std::istringstream one(read_file(dir / "one.run"));
    const auto single = read_run(one);
    REQUIRE(single.at("q").size() == 2);
    CHECK(single.at("q")[0].doc == "x");
    CHECK(single.at("q")[1].doc == "y");

    CHECK(cli({"fuse", "--run", dir / "a.run", "--run", dir / "b.run", "--output", dir / "two.run"}).code == kExitOk);
    std::istringstream two(read_file(dir / "two.run"));
    const auto fused = read_run(two).at("q");
    REQUIRE(fused.size() == 4);
    // Rank-1 docs tie at 1/61 and rank-2 docs at 1/62; ties go by id.
    CHECK(fused[0].doc == "u");
    CHECK(fused[1].doc == "x");
    CHECK(fused[2].doc == "v");
    CHECK(fused[3].doc == "y");

    CHECK(cli({"fuse", "--run", dir / "a.run", "--kappa", "0", "--output", dir / "k.run"}).code == kExitUsage);
    CHECK(cli({"fuse", "--output", dir / "k.run"}).code == kExitUsage);
  }

  TEST_CASE("synth, run, bm25 and eval pipeline") {
    TempDir dir;
    const auto s = cli({"synth", "--out-dir", dir / "data", "--queries", "60", "--listings", "600", "--shops", "30",
                        "--tags", "120", "--clusters", "6", "--events", "3000", "--eval-queries", "40"});
    REQUIRE(s.code == kExitOk);
    REQUIRE(cli({"build", "--log", dir / "data/log.jsonl", "--output", dir / "g.xwg", "--extend"}).code == kExitOk);
    const auto run = cli({"run", "--graph", dir / "g.xwg", "--queries", dir / "data/queries.tsv", "--run-output",
                          dir / "xwalk.run", "--walks", "300"});
    CHECK(run.code == kExitOk);
    const auto first = read_file(dir / "xwalk.run");
    REQUIRE(cli({"run", "--graph", dir / "g.xwg", "--queries", dir / "data/queries.tsv", "--run-output",
                 dir / "xwalk.run", "--walks", "300"})
                .code == kExitOk);
    CHECK(read_file(dir / "xwalk.run") == first);

    CHECK(cli({"bm25", "--corpus", dir / "data/corpus.tsv", "--queries", dir / "data/queries.tsv", "--run-output",
               dir / "bm25.run"})
              .code == kExitOk);
    CHECK(cli({"bm25", "--log", dir / "data/log.jsonl", "--queries", dir / "data/queries.tsv", "--run-output",
               dir / "bm25_log.run"})
              .code == kExitOk);
    CHECK(cli({"bm25", "--queries", dir / "data/queries.tsv", "--run-output", dir / "x.run"}).code == kExitUsage);
    CHECK(cli({"fuse", "--run", dir / "xwalk.run", "--run", dir / "bm25.run", "-o", dir / "rrf.run"}).code ==
          kExitOk);
    const auto ev = cli({"eval", "--run", dir / "xwalk.run", "--run", dir / "bm25.run", "--run", dir / "rrf.run",
                         "--qrels", dir / "data/qrels.txt", "--freqs", dir / "data/freqs.txt"});
    CHECK(ev.code == kExitOk);
    CHECK(ev.out.find("rrf.head.r@1000=") != std::string::npos);
  }
}
