#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace xwalk {

using NodeId = std::uint64_t;

enum class NodeKind : std::uint8_t { Query = 0, Listing = 1, Shop = 2, Tag = 3 };

inline constexpr std::size_t kNodeKindCount = 4;

/// Listings form one side of the bipartite graph; queries, shops and tags the other.
constexpr bool is_listing_side(NodeKind kind) { return kind == NodeKind::Listing; }

std::string_view to_string(NodeKind kind);

struct NodeRef {
  NodeId id = 0;
  NodeKind kind = NodeKind::Query;
  std::string key;

  bool operator==(const NodeRef&) const = default;
};

/// Thrown when a node/arc accessor is called outside its contract.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Thrown when packed arrays fail the structural invariants.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool ok() const { return errors.empty(); }
};

/// Immutable weighted bipartite graph in CSR layout.
///
/// Arcs of node n occupy [offsets[n], offsets[n+1]) in `targets` and `cdf`.
/// The cdf slice holds cumulative transition probabilities over the node's
/// arcs sorted by non-increasing weight, so the last entry is 1.
class CsrGraph {
 public:
  CsrGraph() : offsets_{0} {}

  /// Takes ownership of the packed arrays and checks every invariant.
  /// Throws InvariantViolation on the first structural error.
  static CsrGraph from_parts(std::vector<NodeRef> nodes, std::vector<std::uint64_t> offsets,
                             std::vector<NodeId> targets, std::vector<double> cdf);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t arc_count() const { return targets_.size(); }

  const NodeRef& node(NodeId id) const;
  std::span<const NodeRef> nodes() const { return nodes_; }
  std::span<const std::uint64_t> offsets() const { return offsets_; }
  std::span<const NodeId> targets() const { return targets_; }
  std::span<const double> cdf() const { return cdf_; }

  std::size_t degree(NodeId id) const;
  std::span<const NodeId> neighbors(NodeId id) const;
  std::span<const double> cdf_slice(NodeId id) const;

  std::optional<NodeId> lookup(NodeKind kind, std::string_view key) const;

  /// Transition probability of the index-th arc of `node`.
  double edge_probability(NodeId node, std::size_t index) const;

  std::size_t count_nodes(NodeKind kind) const;

  /// Full invariant check. Degree-0 nodes are reported as warnings.
  ValidationReport validate() const;

  /// Same nodes, offsets, targets and bit-identical cdf values.
  bool structurally_equal(const CsrGraph& other) const;

 private:
  void build_index();

  std::vector<NodeRef> nodes_;
  std::vector<std::uint64_t> offsets_;
  std::vector<NodeId> targets_;
  std::vector<double> cdf_;
  std::unordered_map<std::string, NodeId> index_[kNodeKindCount];
};

inline std::optional<NodeId> lookup_node(const CsrGraph& graph, NodeKind kind, std::string_view key) {
  return graph.lookup(kind, key);
}

inline double edge_probability(const CsrGraph& graph, NodeId node, std::size_t index) {
  return graph.edge_probability(node, index);
}

// Graph file format

inline constexpr char kGraphMagic[4] = {'X', 'W', 'L', 'K'};
inline constexpr std::uint32_t kGraphFormatVersion = 1;

enum class LoadErrorKind { BadMagic, UnsupportedVersion, Truncated, InvariantViolation };

class GraphLoadError : public std::runtime_error {
 public:
  GraphLoadError(LoadErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  LoadErrorKind kind() const { return kind_; }

 private:
  LoadErrorKind kind_;
};

/// Writes the little-endian graph file. Returns the number of bytes written.
std::uint64_t serialize_graph(const CsrGraph& graph, std::ostream& sink);
CsrGraph deserialize_graph(std::istream& source);

void save_graph(const CsrGraph& graph, const std::string& path);
CsrGraph load_graph(const std::string& path);

}  // namespace xwalk
