#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xwalk/graph.hpp"
#include "xwalk/sampler.hpp"

namespace xwalk {

struct WalkParams {
  std::uint64_t walks = 1000;
  std::uint32_t hops = 3;  // total hops; odd so walks end on listings
  std::size_t top_k = 1000;
  SamplerConfig sampler;

  /// Throws ParameterError.
  void check() const;
};

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The query has no node in the graph.
class NoSuchQuery : public std::runtime_error {
 public:
  explicit NoSuchQuery(const std::string& query)
      : std::runtime_error("cold start: query not in graph: '" + query + "'") {}
};

/// Node visit counts accumulated over one walk level.
class WalkCounter {
 public:
  void add(NodeId node, std::uint64_t n) {
    counts_[node] += n;
    total_ += n;
  }
  void merge(const WalkCounter& other) {
    for (const auto& [node, n] : other.counts_) add(node, n);
  }

  std::uint64_t total() const { return total_; }
  std::size_t size() const { return counts_.size(); }
  bool empty() const { return counts_.empty(); }
  std::uint64_t count(NodeId node) const {
    auto it = counts_.find(node);
    return it == counts_.end() ? 0 : it->second;
  }
  const std::unordered_map<NodeId, std::uint64_t>& counts() const { return counts_; }

  /// Entries ordered by ascending node id.
  std::vector<std::pair<NodeId, std::uint64_t>> sorted_by_node() const;

 private:
  std::unordered_map<NodeId, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

struct WalkStats {
  ProbeStats probes;
  std::uint64_t dropped_mass = 0;  // walks that reached a node with no arcs
};

/// Breadth-first k-hop walk from `start`.
///
/// Level 0 samples c arcs from `start` (the first credited `multiplier`).
/// Every later level samples, from each node reached with count t, t arcs of
/// its own. Performs remaining_hops + 1 levels and returns the final level's
/// counter. Nodes within a level are expanded in ascending id order.
WalkCounter xwalk_bfs(const CsrGraph& graph, NodeId start, std::uint64_t c, std::uint32_t remaining_hops,
                      const SamplerConfig& config, WalkRng& rng, std::uint64_t multiplier = 1,
                      WalkStats* stats = nullptr);

struct ScoredListing {
  std::string listing;
  double score = 0.0;

  bool operator==(const ScoredListing&) const = default;
};

struct RankedResult {
  std::string query;
  std::vector<ScoredListing> results;

  bool operator==(const RankedResult&) const = default;
};

/// Normalizes the query, walks params.hops hops from its node and ranks the
/// listings reached by visit count (ties by ascending listing key).
/// Throws NoSuchQuery for queries absent from the graph and ParameterError for invalid params.
RankedResult retrieve(const CsrGraph& graph, std::string_view query_text, const WalkParams& params, WalkRng& rng,
                      WalkStats* stats = nullptr);

RankedResult retrieve(const CsrGraph& graph, std::string_view query_text, const WalkParams& params,
                      std::uint64_t seed, WalkStats* stats = nullptr);

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

/// Seed for one query: splitmix64(base_seed + fnv1a64(normalized text)).
std::uint64_t query_seed(std::uint64_t base_seed, std::string_view query_text);

struct BatchOutcome {
  RankedResult result;
  std::optional<std::string> error;
  bool cold_start = false;

  bool operator==(const BatchOutcome&) const = default;
};

/// Retrieves every query with its own derived seed. Runs queries in parallel
/// with OpenMP; output order matches input order. Errors are recorded per query.
std::vector<BatchOutcome> batch_retrieve(const CsrGraph& graph, const std::vector<std::string>& queries,
                                         const WalkParams& params, std::uint64_t base_seed);

/// Sequential reference for batch_retrieve().
std::vector<BatchOutcome> batch_retrieve_serial(const CsrGraph& graph, const std::vector<std::string>& queries,
                                                const WalkParams& params, std::uint64_t base_seed);

}  // namespace xwalk
