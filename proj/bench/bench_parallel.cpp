// Serial references vs the OpenMP kernels on one synthetic log.

#include <benchmark/benchmark.h>

#include "xwalk/builder.hpp"
#include "xwalk/synth.hpp"
#include "xwalk/walk.hpp"

namespace {

struct Fixture {
  xwalk::SyntheticData data;
  xwalk::CsrGraph graph;
  std::vector<std::string> queries;

  Fixture() {
    xwalk::SyntheticLogSpec spec;
    spec.eval_queries = 256;
    data = xwalk::generate_synthetic_log(spec);
    graph = xwalk::build_graph(xwalk::collate(data.log), {{}, true});
    for (const auto& q : data.eval) queries.push_back(q.text);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

xwalk::WalkParams params() {
  xwalk::WalkParams p;
  p.walks = 1000;
  p.hops = 3;
  p.top_k = 100;
  return p;
}

void BM_BatchRetrieveSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(xwalk::batch_retrieve_serial(f.graph, f.queries, params(), 42));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.queries.size()));
}

void BM_BatchRetrieveOmp(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(xwalk::batch_retrieve(f.graph, f.queries, params(), 42));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.queries.size()));
}

void BM_CollateSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(xwalk::collate_serial(f.data.log));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.data.log.size()));
}

void BM_CollateOmp(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(xwalk::collate(f.data.log));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.data.log.size()));
}

}  // namespace

BENCHMARK(BM_BatchRetrieveSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchRetrieveOmp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CollateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CollateOmp)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
