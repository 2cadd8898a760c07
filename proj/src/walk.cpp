#include "xwalk/walk.hpp"

#include <algorithm>
#include <iostream>

#include "xwalk/builder.hpp"

namespace xwalk {

void WalkParams::check() const {
  sampler.check();
  if (walks < 1) throw ParameterError("number of walks must be at least 1");
  if (hops < 1 || hops % 2 == 0) throw ParameterError("hops must be odd and at least 1, got " + std::to_string(hops));
  if (top_k < 1) throw ParameterError("top_k must be at least 1");
}

std::vector<std::pair<NodeId, std::uint64_t>> WalkCounter::sorted_by_node() const {
  std::vector<std::pair<NodeId, std::uint64_t>> out(counts_.begin(), counts_.end());
  std::sort(out.begin(), out.end());
  return out;
}

WalkCounter xwalk_bfs(const CsrGraph& graph, NodeId start, std::uint64_t c, std::uint32_t remaining_hops,
                      const SamplerConfig& config, WalkRng& rng, std::uint64_t multiplier, WalkStats* stats) {
  if (graph.degree(start) == 0) {
    throw DeadEndError("walk start '" + graph.node(start).key + "' has no arcs");
  }
  ProbeStats* probes = stats ? &stats->probes : nullptr;
  const auto targets = graph.targets();
  const auto offsets = graph.offsets();

  std::vector<std::pair<NodeId, std::uint64_t>> frontier{{start, c}};
  WalkCounter level;
  for (std::uint32_t depth = 0; depth <= remaining_hops; ++depth) {
    level = WalkCounter{};
    for (const auto& [node, count] : frontier) {
      const auto cdf = graph.cdf_slice(node);
      if (cdf.empty()) {
        if (stats) stats->dropped_mass += count;
        std::cerr << "xwalk: dropping " << count << " walks at dead end '" << graph.node(node).key << "'\n";
        continue;
      }
      const auto base = offsets[node];
      for_each_sample(cdf, count, config, rng, depth == 0 ? multiplier : 1, probes,
                      [&](std::size_t index, std::uint64_t n) { level.add(targets[base + index], n); });
    }
    if (depth < remaining_hops) frontier = level.sorted_by_node();
  }
  return level;
}

RankedResult retrieve(const CsrGraph& graph, std::string_view query_text, const WalkParams& params, WalkRng& rng,
                      WalkStats* stats) {
  params.check();
  const auto normalized = normalize_query(query_text);
  const auto start = graph.lookup(NodeKind::Query, normalized);
  if (!start) throw NoSuchQuery(normalized);

  const auto counter = xwalk_bfs(graph, *start, params.walks, params.hops - 1, params.sampler, rng, 1, stats);

  std::vector<std::pair<NodeId, std::uint64_t>> listings;
  listings.reserve(counter.size());
  for (const auto& [node, n] : counter.counts()) {
    if (graph.node(node).kind == NodeKind::Listing) listings.emplace_back(node, n);
  }
  if (listings.size() != counter.size()) {
    throw std::logic_error("odd-hop walk ended on a non-listing node");
  }

  auto by_score = [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return graph.node(a.first).key < graph.node(b.first).key;
  };
  const std::size_t keep = std::min(params.top_k, listings.size());
  std::partial_sort(listings.begin(), listings.begin() + static_cast<std::ptrdiff_t>(keep), listings.end(), by_score);

  RankedResult result;
  result.query = normalized;
  result.results.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    result.results.push_back({graph.node(listings[i].first).key, static_cast<double>(listings[i].second)});
  }
  return result;
}

RankedResult retrieve(const CsrGraph& graph, std::string_view query_text, const WalkParams& params,
                      std::uint64_t seed, WalkStats* stats) {
  WalkRng rng(seed);
  return retrieve(graph, query_text, params, rng, stats);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t query_seed(std::uint64_t base_seed, std::string_view query_text) {
  return splitmix64(base_seed + fnv1a64(normalize_query(query_text)));
}

namespace {

BatchOutcome retrieve_one(const CsrGraph& graph, const std::string& query, const WalkParams& params,
                          std::uint64_t base_seed) {
  BatchOutcome out;
  out.result.query = normalize_query(query);
  try {
    out.result = retrieve(graph, query, params, query_seed(base_seed, query));
  } catch (const NoSuchQuery& e) {
    out.error = e.what();
    out.cold_start = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace

std::vector<BatchOutcome> batch_retrieve(const CsrGraph& graph, const std::vector<std::string>& queries,
                                         const WalkParams& params, std::uint64_t base_seed) {
  std::vector<BatchOutcome> out(queries.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(queries.size()); ++i) {
    out[i] = retrieve_one(graph, queries[i], params, base_seed);
  }
  return out;
}

std::vector<BatchOutcome> batch_retrieve_serial(const CsrGraph& graph, const std::vector<std::string>& queries,
                                                const WalkParams& params, std::uint64_t base_seed) {
  std::vector<BatchOutcome> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(retrieve_one(graph, q, params, base_seed));
  return out;
}

}  // namespace xwalk
