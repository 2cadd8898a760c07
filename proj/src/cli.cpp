#include "xwalk/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "xwalk/bm25.hpp"
#include "xwalk/builder.hpp"
#include "xwalk/eval.hpp"
#include "xwalk/graph.hpp"
#include "xwalk/service.hpp"
#include "xwalk/synth.hpp"
#include "xwalk/walk.hpp"

namespace xwalk {

namespace {

namespace fs = std::filesystem;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

struct WalkFlags {
  std::uint64_t walks = 1000;
  std::uint32_t hops = 3;
  std::size_t topk = 1000;
  std::uint64_t seed = 0;
  bool random_seed = false;
  std::string sampler = "mh";
  double sigma2 = 0.2;

  void attach(CLI::App* cmd) {
    cmd->add_option("--walks", walks, "Number of walks from the query node")->capture_default_str();
    cmd->add_option("--hops", hops, "Total hops per walk (odd)")->capture_default_str();
    cmd->add_option("--topk", topk, "Number of listings to return")->capture_default_str();
    cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
    cmd->add_flag("--random-seed", random_seed, "Seed from system entropy instead of --seed");
    cmd->add_option("--sampler", sampler, "Edge sampler: mh or its")
        ->check(CLI::IsMember({"mh", "its"}))
        ->capture_default_str();
    cmd->add_option("--sigma2", sigma2, "Variance of the Metropolis-Hastings proposal")->capture_default_str();
  }

  WalkParams params() const {
    WalkParams p;
    p.walks = walks;
    p.hops = hops;
    p.top_k = topk;
    p.sampler.proposal_variance = sigma2;
    p.sampler.mode = sampler == "its" ? SamplerMode::InverseTransform : SamplerMode::MetropolisHastings;
    p.check();
    return p;
  }

  std::uint64_t effective_seed() const {
    if (!random_seed) return seed;
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
};

std::string graph_path_or_env(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("XWALK_GRAPH"); env && *env) return env;
  throw std::invalid_argument("no graph given (use --graph or set XWALK_GRAPH)");
}

/// Reads `qid<TAB>query text` lines.
std::vector<std::pair<std::string, std::string>> read_queries(const std::string& path) {
  auto in = open_in(path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) throw FormatError(line_no, "expected qid<TAB>query in " + path);
    out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

LogParseResult read_log(const std::string& path, std::ostream& err) {
  auto in = open_in(path);
  auto parsed = parse_interaction_log(in);
  constexpr std::size_t kShown = 10;
  for (std::size_t i = 0; i < std::min(kShown, parsed.errors.size()); ++i) {
    err << path << ":" << parsed.errors[i].line << ": " << parsed.errors[i].message << '\n';
  }
  if (parsed.errors.size() > kShown) err << "... " << parsed.errors.size() - kShown << " more malformed lines\n";
  check_error_rate(parsed);
  return parsed;
}

std::string run_name(const std::string& path) { return fs::path(path).stem().string(); }

// ---------------------------------------------------------------------------

int cmd_build(const std::string& log_path, const std::string& output, const WeightCoefficients& coeffs, bool extend,
              std::ostream& out, std::ostream& err) {
  const auto parsed = read_log(log_path, err);
  const auto collated = collate(parsed.records);
  BuildStats stats;
  const auto graph = build_graph(collated, {coeffs, extend}, &stats);
  for (const auto& w : stats.warnings) err << "warning: " << w << '\n';
  save_graph(graph, output);

  out << "records " << parsed.records.size() << " (" << parsed.errors.size() << " malformed)\n";
  out << "pairs " << collated.pairs.size() << '\n';
  for (auto kind : {NodeKind::Query, NodeKind::Listing, NodeKind::Shop, NodeKind::Tag}) {
    out << to_string(kind) << "_nodes " << graph.count_nodes(kind) << '\n';
  }
  out << "nodes " << graph.node_count() << '\n';
  out << "edges " << graph.arc_count() / 2 << '\n';
  out << "arcs " << graph.arc_count() << '\n';
  return kExitOk;
}

int cmd_query(const std::string& graph_flag, const std::string& query, const WalkFlags& flags,
              const std::string& run_output, const std::string& qid, std::ostream& out) {
  const auto params = flags.params();
  const auto graph = load_graph(graph_path_or_env(graph_flag));
  const auto result = retrieve(graph, query, params, flags.effective_seed());
  for (const auto& r : result.results) out << r.listing << '\t' << r.score << '\n';
  if (!run_output.empty()) {
    auto file = open_out(run_output);
    write_run(file, RunList{{qid, to_run_entries(result)}}, "xwalk");
  }
  return kExitOk;
}

int cmd_run(const std::string& graph_flag, const std::string& queries_path, const WalkFlags& flags,
            const std::string& run_output, std::ostream& out, std::ostream& err) {
  const auto params = flags.params();
  const auto graph = load_graph(graph_path_or_env(graph_flag));
  const auto queries = read_queries(queries_path);
  std::vector<std::string> texts;
  texts.reserve(queries.size());
  for (const auto& [qid, text] : queries) texts.push_back(text);

  const auto outcomes = batch_retrieve(graph, texts, params, flags.effective_seed());
  RunList run;
  std::size_t cold = 0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (outcomes[i].cold_start) ++cold;
    else if (outcomes[i].error) err << "warning: " << queries[i].first << ": " << *outcomes[i].error << '\n';
    run[queries[i].first] = to_run_entries(outcomes[i].result);
  }
  auto file = open_out(run_output);
  write_run(file, run, "xwalk");
  out << "queries " << queries.size() << " cold_start " << cold << '\n';
  return kExitOk;
}

int cmd_bm25(const std::string& corpus_path, const std::string& log_path, const std::string& queries_path,
             const Bm25Params& bm25, std::size_t topk, const std::string& run_output, std::ostream& out,
             std::ostream& err) {
  std::vector<std::pair<std::string, std::string>> docs;
  if (!corpus_path.empty()) {
    auto in = open_in(corpus_path);
    docs = read_corpus(in);
  } else {
    for (const auto& r : read_log(log_path, err).records) {
      if (r.title) docs.emplace_back(r.listing_id, *r.title);
    }
  }
  const auto index = Bm25Index::build(docs, bm25);
  if (index.empty_corpus()) err << "warning: every title is empty; the index matches nothing\n";

  RunList run;
  for (const auto& [qid, text] : read_queries(queries_path)) run[qid] = to_run_entries(index.search(text, topk));
  auto file = open_out(run_output);
  write_run(file, run, "bm25");
  out << "documents " << index.doc_count() << " terms " << index.term_count() << '\n';
  return kExitOk;
}

int cmd_eval(const std::vector<std::string>& run_paths, const std::string& qrels_path,
             const std::string& freqs_path, std::ostream& out, std::ostream& err) {
  auto qrels_in = open_in(qrels_path);
  const auto qrels = read_qrels(qrels_in);

  FrequencyBinAssignment bins;
  if (!freqs_path.empty()) {
    auto in = open_in(freqs_path);
    bins = assign_bins(read_frequencies(in));
  }

  std::vector<std::pair<std::string, RunList>> runs;
  for (const auto& path : run_paths) {
    auto in = open_in(path);
    RunList run;
    try {
      run = read_run(in);
    } catch (const FormatError& e) {
      throw std::runtime_error(path + ": " + e.what());
    }
    const auto unknown = unjudged_queries(run, qrels);
    if (!unknown.empty()) {
      err << "warning: " << path << ": " << unknown.size() << " queries without judgments ignored (first: "
          << unknown.front() << ")\n";
    }
    runs.emplace_back(run_name(path), std::move(run));
  }
  write_report(out, evaluate(runs, qrels, bins));
  return kExitOk;
}

int cmd_fuse(const std::vector<std::string>& run_paths, std::size_t kappa, std::size_t depth,
             const std::string& output, std::ostream& out) {
  if (kappa < 1) throw std::invalid_argument("kappa must be at least 1");
  std::vector<RunList> runs;
  for (const auto& path : run_paths) {
    auto in = open_in(path);
    runs.push_back(read_run(in));
  }
  auto fused = rrf_fuse(runs, kappa);
  if (depth > 0) {
    for (auto& [qid, entries] : fused) {
      if (entries.size() > depth) entries.resize(depth);
    }
  }
  auto file = open_out(output);
  write_run(file, fused, "rrf");
  out << "fused " << runs.size() << " runs over " << fused.size() << " queries\n";
  return kExitOk;
}

int cmd_synth(const SyntheticLogSpec& spec, const std::string& dir, std::ostream& out) {
  const auto data = generate_synthetic_log(spec);
  fs::create_directories(dir);
  {
    auto f = open_out((fs::path(dir) / "log.jsonl").string());
    for (const auto& r : data.log) f << format_interaction_line(r) << '\n';
  }
  {
    auto f = open_out((fs::path(dir) / "corpus.tsv").string());
    for (const auto& [id, title] : data.corpus) f << id << '\t' << title << '\n';
  }
  {
    auto f = open_out((fs::path(dir) / "queries.tsv").string());
    for (const auto& q : data.eval) f << q.qid << '\t' << q.text << '\n';
  }
  {
    auto f = open_out((fs::path(dir) / "qrels.txt").string());
    write_qrels(f, data.qrels);
  }
  {
    auto f = open_out((fs::path(dir) / "freqs.txt").string());
    write_frequencies(f, data.frequencies);
  }
  out << "events " << data.log.size() << " eval_queries " << data.eval.size() << " listings "
      << data.corpus.size() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random-walk candidate retrieval over query-listing interaction graphs", "xwalk"};
  app.require_subcommand(1);

  // build
  auto* build = app.add_subcommand("build", "Build a graph file from an interaction log");
  std::string log_path, graph_out;
  WeightCoefficients coeffs;
  bool extend = false;
  build->add_option("--log", log_path, "Newline-delimited JSON interaction log")->required();
  build->add_option("--output,-o", graph_out, "Graph file to write")->required();
  build->add_option("--c1", coeffs.click, "Click coefficient")->capture_default_str();
  build->add_option("--c2", coeffs.cart, "Cart coefficient")->capture_default_str();
  build->add_option("--c3", coeffs.purchase, "Purchase coefficient")->capture_default_str();
  build->add_flag("--extend", extend, "Add shop and tag nodes");

  // query
  auto* query = app.add_subcommand("query", "Retrieve listings for one query");
  std::string graph_path, query_text, run_output, qid = "q0";
  WalkFlags walk;
  query->add_option("--graph", graph_path, "Graph file (default: $XWALK_GRAPH)");
  query->add_option("--query,-q", query_text, "Query text")->required();
  query->add_option("--run-output", run_output, "Also write a TREC run file");
  query->add_option("--qid", qid, "Query id for --run-output")->capture_default_str();
  walk.attach(query);

  // run
  auto* run = app.add_subcommand("run", "Retrieve listings for a file of queries into a TREC run");
  std::string queries_path;
  run->add_option("--graph", graph_path, "Graph file (default: $XWALK_GRAPH)");
  run->add_option("--queries", queries_path, "qid<TAB>query lines")->required();
  run->add_option("--run-output,-o", run_output, "TREC run file to write")->required();
  walk.attach(run);

  // bm25
  auto* bm25 = app.add_subcommand("bm25", "BM25 retrieval over listing titles into a TREC run");
  std::string corpus_path;
  Bm25Params bm25_params;
  std::size_t bm25_topk = 1000;
  auto* corpus_opt = bm25->add_option("--corpus", corpus_path, "listing_id<TAB>title lines");
  auto* log_opt = bm25->add_option("--log", log_path, "Interaction log to harvest titles from");
  corpus_opt->excludes(log_opt);
  bm25->add_option("--queries", queries_path, "qid<TAB>query lines")->required();
  bm25->add_option("--run-output,-o", run_output, "TREC run file to write")->required();
  bm25->add_option("--k1", bm25_params.k1, "BM25 k1")->capture_default_str();
  bm25->add_option("--b", bm25_params.b, "BM25 b")->capture_default_str();
  bm25->add_option("--topk", bm25_topk, "Results per query")->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "Score TREC runs against qrels");
  std::vector<std::string> run_paths;
  std::string qrels_path, freqs_path;
  eval->add_option("--run", run_paths, "TREC run file (repeatable)")->required();
  eval->add_option("--qrels", qrels_path, "Qrels file")->required();
  eval->add_option("--freqs", freqs_path, "qid count lines for popularity bins");

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Reciprocal rank fusion of TREC runs");
  std::size_t kappa = kDefaultRrfKappa, depth = 1000;
  std::string fused_out;
  fuse->add_option("--run", run_paths, "TREC run file (repeatable)")->required();
  fuse->add_option("--kappa", kappa, "RRF rank constant (>= 1)")->capture_default_str();
  fuse->add_option("--depth", depth, "Keep this many fused results per query (0 keeps all)")->capture_default_str();
  fuse->add_option("--output,-o", fused_out, "TREC run file to write")->required();

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Serve GET /retrieve and GET /health over HTTP");
  ServiceConfig service;
  serve_cmd->add_option("--graph", graph_path, "Graph file (default: $XWALK_GRAPH)");
  serve_cmd->add_option("--bind", service.bind_address, "host:port")->capture_default_str();
  serve_cmd->add_option("--timeout-ms", service.request_timeout_ms, "Read/write timeout")->capture_default_str();
  walk.attach(serve_cmd);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic log, corpus, eval queries and qrels");
  SyntheticLogSpec spec;
  std::string out_dir;
  synth->add_option("--out-dir", out_dir, "Directory to write into")->required();
  synth->add_option("--queries", spec.num_queries, "Distinct queries")->capture_default_str();
  synth->add_option("--listings", spec.num_listings, "Catalog size")->capture_default_str();
  synth->add_option("--shops", spec.num_shops, "Shops")->capture_default_str();
  synth->add_option("--tags", spec.tag_vocab_size, "Tag vocabulary size")->capture_default_str();
  synth->add_option("--clusters", spec.cluster_count, "Latent clusters")->capture_default_str();
  synth->add_option("--zipf", spec.zipf_exponent, "Query popularity exponent")->capture_default_str();
  synth->add_option("--events", spec.events, "Training events")->capture_default_str();
  synth->add_option("--eval-queries", spec.eval_queries, "Evaluation sample size")->capture_default_str();
  synth->add_option("--seed", spec.seed, "Random seed")->capture_default_str();
  synth->add_option("--lexical-bias", spec.lexical_bias, "Pick weight per title word shared with the query")->capture_default_str();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*build) return cmd_build(log_path, graph_out, coeffs, extend, out, err);
    if (*query) return cmd_query(graph_path, query_text, walk, run_output, qid, out);
    if (*run) return cmd_run(graph_path, queries_path, walk, run_output, out, err);
    if (*bm25) {
      if (corpus_path.empty() && log_path.empty()) throw std::invalid_argument("bm25 needs --corpus or --log");
      return cmd_bm25(corpus_path, log_path, queries_path, bm25_params, bm25_topk, run_output, out, err);
    }
    if (*eval) return cmd_eval(run_paths, qrels_path, freqs_path, out, err);
    if (*fuse) return cmd_fuse(run_paths, kappa, depth, fused_out, out);
    if (*serve_cmd) {
      service.graph_path = graph_path_or_env(graph_path);
      service.defaults = walk.params();
      service.default_seed = walk.effective_seed();
      serve(service, [&](int port) { err << "listening on port " << port << std::endl; });
      return kExitOk;
    }
    if (*synth) return cmd_synth(spec, out_dir, out);
  } catch (const NoSuchQuery&) {
    err << "cold start: query not in graph\n";
    return kExitColdStart;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace xwalk
