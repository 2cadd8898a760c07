#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <stdexcept>

#include "xwalk/graph.hpp"

namespace xwalk {

enum class SamplerMode { MetropolisHastings, InverseTransform };

struct SamplerConfig {
  /// Variance of the Normal proposal on the normalized index scale [0, 1).
  double proposal_variance = 0.2;
  SamplerMode mode = SamplerMode::MetropolisHastings;

  void check() const {
    if (!(proposal_variance > 0.0)) throw std::invalid_argument("proposal variance must be positive");
  }
};

/// Operation counts used to check the sampling cost.
struct ProbeStats {
  std::uint64_t binary_search_probes = 0;
  std::uint64_t mh_steps = 0;
  std::uint64_t mh_accepts = 0;

  ProbeStats& operator+=(const ProbeStats& o) {
    binary_search_probes += o.binary_search_probes;
    mh_steps += o.mh_steps;
    mh_accepts += o.mh_accepts;
    return *this;
  }
};

/// Random source for one walk. Not shared between threads.
class WalkRng {
 public:
  explicit WalkRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal(double stddev) { return normal_(engine_) * stddev; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Visit counts keyed by local arc index.
struct EdgeCounter {
  std::map<std::size_t, std::uint64_t> counts;
  std::uint64_t total = 0;

  void add(std::size_t index, std::uint64_t n) {
    counts[index] += n;
    total += n;
  }
};

class DeadEndError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Smallest index i with p <= cdf[i]; p beyond the last entry maps to the last index.
/// Performs at most ceil(log2(cdf.size())) probes.
std::size_t its_sample(std::span<const double> cdf, double p, ProbeStats* stats = nullptr);

/// Reflects x into [0, 1): absolute value at 0, mirror at 1.
double fold_unit(double x);

/// Proposal index for a move from `current` with a given Normal step z.
std::size_t mh_propose(std::size_t len, std::size_t current, double z);

/// One Metropolis-Hastings transition targeting the probabilities encoded by `cdf`.
std::size_t mh_step(std::span<const double> cdf, std::size_t current, const SamplerConfig& config, WalkRng& rng,
                    ProbeStats* stats = nullptr);

/// Draws c arcs: the first by inverse transform (credited m), the rest by
/// Metropolis-Hastings or inverse transform depending on config.mode.
EdgeCounter sample_edges(std::span<const double> cdf, std::uint64_t c, const SamplerConfig& config, WalkRng& rng,
                         std::uint64_t multiplier = 1, ProbeStats* stats = nullptr);

EdgeCounter sample_edges(const CsrGraph& graph, NodeId node, std::uint64_t c, const SamplerConfig& config,
                         WalkRng& rng, std::uint64_t multiplier = 1, ProbeStats* stats = nullptr);

/// Same draws as sample_edges, delivered through a callback instead of a map.
template <typename Visit>
void for_each_sample(std::span<const double> cdf, std::uint64_t c, const SamplerConfig& config, WalkRng& rng,
                     std::uint64_t multiplier, ProbeStats* stats, Visit&& visit) {
  if (cdf.empty()) throw DeadEndError("cannot sample from a node with no arcs");
  if (c == 0) return;
  std::size_t index = its_sample(cdf, rng.uniform(), stats);
  visit(index, multiplier);
  for (std::uint64_t step = 1; step < c; ++step) {
    if (config.mode == SamplerMode::MetropolisHastings) {
      index = mh_step(cdf, index, config, rng, stats);
    } else {
      index = its_sample(cdf, rng.uniform(), stats);
    }
    visit(index, std::uint64_t{1});
  }
}

}  // namespace xwalk
