#include "xwalk/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace xwalk {

namespace {

constexpr double kCdfTolerance = 1e-9;
constexpr double kWeightOrderTolerance = 1e-12;

std::string describe(NodeId id) { return "node " + std::to_string(id); }

}  // namespace

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Query: return "query";
    case NodeKind::Listing: return "listing";
    case NodeKind::Shop: return "shop";
    case NodeKind::Tag: return "tag";
  }
  return "unknown";
}

CsrGraph CsrGraph::from_parts(std::vector<NodeRef> nodes, std::vector<std::uint64_t> offsets,
                              std::vector<NodeId> targets, std::vector<double> cdf) {
  CsrGraph g;
  g.nodes_ = std::move(nodes);
  g.offsets_ = std::move(offsets);
  g.targets_ = std::move(targets);
  g.cdf_ = std::move(cdf);
  auto report = g.validate();
  if (!report.ok()) throw InvariantViolation(report.errors.front());
  g.build_index();
  return g;
}

void CsrGraph::build_index() {
  for (auto& m : index_) m.clear();
  for (const auto& n : nodes_) index_[static_cast<std::size_t>(n.kind)].emplace(n.key, n.id);
}

const NodeRef& CsrGraph::node(NodeId id) const {
  if (id >= nodes_.size()) throw ContractViolation(describe(id) + " out of range");
  return nodes_[id];
}

std::size_t CsrGraph::degree(NodeId id) const {
  if (id >= nodes_.size()) throw ContractViolation(describe(id) + " out of range");
  return offsets_[id + 1] - offsets_[id];
}

std::span<const NodeId> CsrGraph::neighbors(NodeId id) const {
  auto d = degree(id);
  return {targets_.data() + offsets_[id], d};
}

std::span<const double> CsrGraph::cdf_slice(NodeId id) const {
  auto d = degree(id);
  return {cdf_.data() + offsets_[id], d};
}

std::optional<NodeId> CsrGraph::lookup(NodeKind kind, std::string_view key) const {
  const auto& m = index_[static_cast<std::size_t>(kind)];
  auto it = m.find(std::string(key));
  if (it == m.end()) return std::nullopt;
  return it->second;
}

double CsrGraph::edge_probability(NodeId node, std::size_t index) const {
  auto slice = cdf_slice(node);
  if (index >= slice.size()) {
    throw ContractViolation("arc index " + std::to_string(index) + " out of range for " + describe(node) +
                            " with degree " + std::to_string(slice.size()));
  }
  return index == 0 ? slice[0] : slice[index] - slice[index - 1];
}

std::size_t CsrGraph::count_nodes(NodeKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [kind](const NodeRef& n) { return n.kind == kind; }));
}

ValidationReport CsrGraph::validate() const {
  ValidationReport r;
  const std::size_t n = nodes_.size();
  const std::size_t arcs = targets_.size();

  if (offsets_.size() != n + 1) {
    r.errors.push_back("offsets length " + std::to_string(offsets_.size()) + " != node_count + 1");
    return r;
  }
  if (offsets_.front() != 0) r.errors.push_back("offsets[0] != 0");
  if (offsets_.back() != arcs) r.errors.push_back("offsets[node_count] != arc_count");
  if (cdf_.size() != arcs) r.errors.push_back("cdf length != arc_count");
  for (std::size_t i = 0; i < n; ++i) {
    if (offsets_[i + 1] < offsets_[i]) {
      r.errors.push_back("offsets decrease at " + describe(i));
      break;
    }
  }
  if (!r.ok()) return r;

  {
    std::unordered_map<std::string, NodeId> seen[kNodeKindCount];
    for (std::size_t i = 0; i < n; ++i) {
      const auto& node = nodes_[i];
      if (node.id != i) r.errors.push_back(describe(i) + " carries id " + std::to_string(node.id));
      if (static_cast<std::size_t>(node.kind) >= kNodeKindCount) {
        r.errors.push_back(describe(i) + " has an unknown kind");
        continue;
      }
      if (!seen[static_cast<std::size_t>(node.kind)].emplace(node.key, i).second) {
        r.errors.push_back("duplicate " + std::string(to_string(node.kind)) + " key '" + node.key + "'");
      }
    }
  }
  if (!r.ok()) return r;

  for (NodeId t : targets_) {
    if (t >= n) {
      r.errors.push_back("arc target " + std::to_string(t) + " out of range");
      return r;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto begin = offsets_[i];
    const auto end = offsets_[i + 1];
    if (begin == end) {
      r.warnings.push_back(describe(i) + " has degree 0");
      continue;
    }
    double prev_cdf = 0.0;
    double prev_weight = INFINITY;
    for (auto a = begin; a < end; ++a) {
      const double c = cdf_[a];
      if (!(c > 0.0) || c < prev_cdf || c > 1.0 + kCdfTolerance) {
        r.errors.push_back(describe(i) + " has a malformed cdf at arc " + std::to_string(a - begin));
        break;
      }
      const double w = c - prev_cdf;
      if (w > prev_weight + kWeightOrderTolerance) {
        r.errors.push_back(describe(i) + " arcs are not sorted by non-increasing weight");
        break;
      }
      prev_weight = w;
      prev_cdf = c;
      if (is_listing_side(nodes_[i].kind) == is_listing_side(nodes_[targets_[a]].kind)) {
        r.errors.push_back("arc " + describe(i) + " -> " + describe(targets_[a]) + " is not bipartite");
        break;
      }
    }
    if (std::fabs(cdf_[end - 1] - 1.0) > kCdfTolerance) {
      r.errors.push_back(describe(i) + " cdf does not end at 1");
    }
  }
  if (!r.ok()) return r;

  if (arcs % 2 != 0) r.errors.push_back("odd arc count " + std::to_string(arcs));
  std::vector<std::pair<NodeId, NodeId>> pairs;
  pairs.reserve(arcs);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto a = offsets_[i]; a < offsets_[i + 1]; ++a) pairs.emplace_back(i, targets_[a]);
  }
  std::sort(pairs.begin(), pairs.end());
  if (std::adjacent_find(pairs.begin(), pairs.end()) != pairs.end()) {
    r.errors.push_back("duplicate arc");
    return r;
  }
  for (const auto& [a, b] : pairs) {
    if (!std::binary_search(pairs.begin(), pairs.end(), std::pair{b, a})) {
      r.errors.push_back("arc " + describe(a) + " -> " + describe(b) + " has no reverse arc");
      break;
    }
  }
  return r;
}

bool CsrGraph::structurally_equal(const CsrGraph& other) const {
  if (nodes_ != other.nodes_ || offsets_ != other.offsets_ || targets_ != other.targets_) return false;
  if (cdf_.size() != other.cdf_.size()) return false;
  return std::equal(cdf_.begin(), cdf_.end(), other.cdf_.begin(), [](double a, double b) {
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
  });
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <typename T>
  void put(T value) {
    static_assert(std::is_unsigned_v<T>);
    char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
    bytes(buf, sizeof(T));
  }

  void bytes(const char* data, std::size_t len) {
    out_.write(data, static_cast<std::streamsize>(len));
    if (!out_) throw std::runtime_error("graph write failed");
    written_ += len;
  }

  std::uint64_t written() const { return written_; }

 private:
  std::ostream& out_;
  std::uint64_t written_ = 0;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(char* data, std::size_t len, const char* what) {
    in_.read(data, static_cast<std::streamsize>(len));
    if (static_cast<std::size_t>(in_.gcount()) != len) {
      throw GraphLoadError(LoadErrorKind::Truncated, std::string("truncated graph file while reading ") + what);
    }
  }

  template <typename T>
  T get(const char* what) {
    unsigned char buf[sizeof(T)];
    bytes(reinterpret_cast<char*>(buf), sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
    return v;
  }

  // Reads in bounded chunks so a corrupt count fails as truncation rather than
  // as an enormous allocation.
  template <typename T, typename Convert>
  void array(std::vector<T>& out, std::uint64_t count, const char* what, Convert convert) {
    constexpr std::uint64_t kChunk = 1 << 16;
    std::vector<unsigned char> buf;
    out.clear();
    while (count > 0) {
      const auto take = std::min(count, kChunk);
      buf.resize(take * 8);
      bytes(reinterpret_cast<char*>(buf.data()), buf.size(), what);
      for (std::uint64_t i = 0; i < take; ++i) {
        std::uint64_t v = 0;
        for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(buf[i * 8 + b]) << (8 * b);
        out.push_back(convert(v));
      }
      count -= take;
    }
  }

 private:
  std::istream& in_;
};

}  // namespace

std::uint64_t serialize_graph(const CsrGraph& graph, std::ostream& sink) {
  Writer w(sink);
  w.bytes(kGraphMagic, sizeof(kGraphMagic));
  w.put<std::uint32_t>(kGraphFormatVersion);
  w.put<std::uint64_t>(graph.node_count());
  w.put<std::uint64_t>(graph.arc_count());
  for (const auto& n : graph.nodes()) {
    w.put<std::uint8_t>(static_cast<std::uint8_t>(n.kind));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(n.key.size()));
    w.bytes(n.key.data(), n.key.size());
  }
  for (auto o : graph.offsets()) w.put<std::uint64_t>(o);
  for (auto t : graph.targets()) w.put<std::uint64_t>(t);
  for (auto c : graph.cdf()) w.put<std::uint64_t>(std::bit_cast<std::uint64_t>(c));
  return w.written();
}

CsrGraph deserialize_graph(std::istream& source) {
  Reader r(source);
  char magic[4];
  r.bytes(magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kGraphMagic, sizeof(magic)) != 0) {
    throw GraphLoadError(LoadErrorKind::BadMagic, "not a graph file (bad magic)");
  }
  const auto version = r.get<std::uint32_t>("version");
  if (version != kGraphFormatVersion) {
    throw GraphLoadError(LoadErrorKind::UnsupportedVersion,
                         "unsupported graph format version " + std::to_string(version));
  }
  const auto node_count = r.get<std::uint64_t>("node count");
  const auto arc_count = r.get<std::uint64_t>("arc count");

  std::vector<NodeRef> nodes;
  for (std::uint64_t i = 0; i < node_count; ++i) {
    NodeRef n;
    n.id = i;
    const auto tag = r.get<std::uint8_t>("node kind");
    if (tag >= kNodeKindCount) {
      throw GraphLoadError(LoadErrorKind::InvariantViolation, "unknown node kind tag " + std::to_string(tag));
    }
    n.kind = static_cast<NodeKind>(tag);
    const auto len = r.get<std::uint32_t>("key length");
    n.key.resize(len);
    if (len > 0) r.bytes(n.key.data(), len, "node key");
    nodes.push_back(std::move(n));
  }

  std::vector<std::uint64_t> offsets;
  std::vector<NodeId> targets;
  std::vector<double> cdf;
  auto same = [](std::uint64_t v) { return v; };
  r.array(offsets, node_count + 1, "offsets", same);
  r.array(targets, arc_count, "targets", same);
  r.array(cdf, arc_count, "cdf", [](std::uint64_t v) { return std::bit_cast<double>(v); });

  try {
    return CsrGraph::from_parts(std::move(nodes), std::move(offsets), std::move(targets), std::move(cdf));
  } catch (const InvariantViolation& e) {
    throw GraphLoadError(LoadErrorKind::InvariantViolation, std::string("invalid graph: ") + e.what());
  }
}

void save_graph(const CsrGraph& graph, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  serialize_graph(graph, out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

CsrGraph load_graph(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open graph file '" + path + "'");
  return deserialize_graph(in);
}

}  // namespace xwalk
