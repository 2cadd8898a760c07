#include "xwalk/sampler.hpp"

#include <cmath>

namespace xwalk {

std::size_t its_sample(std::span<const double> cdf, double p, ProbeStats* stats) {
  // Invariant: the answer lies in [lo, hi]; cdf.back() == 1 so hi starts at the last index.
  std::size_t lo = 0;
  std::size_t hi = cdf.size() - 1;
  std::uint64_t probes = 0;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    ++probes;
    if (p <= cdf[mid]) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  if (stats) stats->binary_search_probes += probes;
  return lo;
}

double fold_unit(double x) {
  if (!std::isfinite(x)) return 0.0;
  // Reflection at 0 and 1 is periodic with period 2.
  double r = std::fmod(std::fabs(x), 2.0);
  if (r >= 1.0) r = 2.0 - r;
  // 2 - r can round back up to 1.0 for r just below 1.
  return r < 1.0 ? r : std::nextafter(1.0, 0.0);
}

std::size_t mh_propose(std::size_t len, std::size_t current, double z) {
  const double n = static_cast<double>(len);
  const double u = (static_cast<double>(current) + 0.5) / n;
  const double folded = fold_unit(u + z);
  auto candidate = static_cast<std::size_t>(folded * n);
  return candidate < len ? candidate : len - 1;
}

namespace {

double arc_probability(std::span<const double> cdf, std::size_t i) { return i == 0 ? cdf[0] : cdf[i] - cdf[i - 1]; }

}  // namespace

std::size_t mh_step(std::span<const double> cdf, std::size_t current, const SamplerConfig& config, WalkRng& rng,
                    ProbeStats* stats) {
  const std::size_t len = cdf.size();
  if (len <= 1) return 0;
  if (stats) ++stats->mh_steps;

  const std::size_t candidate = mh_propose(len, current, rng.normal(std::sqrt(config.proposal_variance)));
  bool accept = true;
  if (candidate != current) {
    const double ratio = arc_probability(cdf, candidate) / arc_probability(cdf, current);
    if (ratio < 1.0) accept = rng.uniform() < ratio;
  }
  if (!accept) return current;
  if (stats) ++stats->mh_accepts;
  return candidate;
}

EdgeCounter sample_edges(std::span<const double> cdf, std::uint64_t c, const SamplerConfig& config, WalkRng& rng,
                         std::uint64_t multiplier, ProbeStats* stats) {
  EdgeCounter counter;
  for_each_sample(cdf, c, config, rng, multiplier, stats,
                  [&](std::size_t index, std::uint64_t n) { counter.add(index, n); });
  return counter;
}

EdgeCounter sample_edges(const CsrGraph& graph, NodeId node, std::uint64_t c, const SamplerConfig& config,
                         WalkRng& rng, std::uint64_t multiplier, ProbeStats* stats) {
  if (graph.degree(node) == 0) {
    throw DeadEndError("node " + std::to_string(node) + " ('" + graph.node(node).key + "') has no arcs");
  }
  return sample_edges(graph.cdf_slice(node), c, config, rng, multiplier, stats);
}

}  // namespace xwalk
