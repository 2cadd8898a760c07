#include <doctest.h>

#include <cstring>
#include <sstream>

#include "test_support.hpp"
#include "xwalk/graph.hpp"

using namespace xwalk;
using xwalk::test::build_from;
using xwalk::test::table1_records;

namespace {

std::string bytes_of(const CsrGraph& g) {
  std::ostringstream out(std::ios::binary);
  serialize_graph(g, out);
  return out.str();
}

CsrGraph from_bytes(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return deserialize_graph(in);
}

LoadErrorKind load_error_kind(const std::string& bytes) {
  try {
    from_bytes(bytes);
  } catch (const GraphLoadError& e) {
    return e.kind();
  }
  FAIL("expected a load error");
  return LoadErrorKind::BadMagic;
}

// q0 - l1 with one edge.
CsrGraph single_edge() {
  return CsrGraph::from_parts({{0, NodeKind::Query, "q"}, {1, NodeKind::Listing, "l"}}, {0, 1, 2}, {1, 0},
                              {1.0, 1.0});
}

}  // namespace

TEST_SUITE("graph_model") {
  TEST_CASE("lookup_node finds nodes by kind and key") {
    const auto g = build_from(table1_records(), false);
    const auto id = lookup_node(g, NodeKind::Query, "wedding dress");
    REQUIRE(id);
    CHECK(g.node(*id).key == "wedding dress");
    CHECK(g.node(*id).kind == NodeKind::Query);
    CHECK_FALSE(lookup_node(g, NodeKind::Query, "never seen"));
    // Same key under another kind is a different node.
    CHECK_FALSE(lookup_node(g, NodeKind::Query, "l12"));
    const auto l12 = lookup_node(g, NodeKind::Listing, "l12");
    REQUIRE(l12);
    CHECK(g.node(*l12).key == "l12");
  }

  TEST_CASE("edge_probability differences the cdf") {
    const auto g = single_edge();
    CHECK(edge_probability(g, 0, 0) == 1.0);
    CHECK_THROWS_AS(edge_probability(g, 0, 1), ContractViolation);
    CHECK_THROWS_AS(edge_probability(g, 7, 0), ContractViolation);

    // One query with weights 3, 2, 1 to three listings.
    const auto g3 = CsrGraph::from_parts(
        {{0, NodeKind::Query, "q"}, {1, NodeKind::Listing, "a"}, {2, NodeKind::Listing, "b"},
         {3, NodeKind::Listing, "c"}},
        {0, 3, 4, 5, 6}, {1, 2, 3, 0, 0, 0}, {0.5, 5.0 / 6.0, 1.0, 1.0, 1.0, 1.0});
    CHECK(edge_probability(g3, 0, 0) == doctest::Approx(0.5));
    CHECK(edge_probability(g3, 0, 1) == doctest::Approx(1.0 / 3.0));
    CHECK(edge_probability(g3, 0, 2) == doctest::Approx(1.0 / 6.0));
  }

  TEST_CASE("edge probabilities equal renormalized weights on random graphs") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      const auto records = test::random_log(rng, {});
      const bool extend = trial % 2 == 0;
      const WeightCoefficients coeffs{1.0, 3.0, 10.0};
      const auto g = build_from(records, extend, coeffs);
      const auto table = test::weight_table(records, coeffs, extend);
      for (NodeId n = 0; n < g.node_count(); ++n) {
        const test::NodeName name{g.node(n).kind, g.node(n).key};
        const double total = table.total(name);
        double sum = 0;
        for (std::size_t i = 0; i < g.degree(n); ++i) {
          const auto& target = g.node(g.neighbors(n)[i]);
          const double expected = table.adj.at(name).at({target.kind, target.key}) / total;
          CHECK(edge_probability(g, n, i) == doctest::Approx(expected).epsilon(1e-12));
          sum += edge_probability(g, n, i);
        }
        CHECK(std::fabs(sum - 1.0) <= 1e-9);
      }
    }
  }

  TEST_CASE("empty graph serializes to the bare header and round-trips") {
    const CsrGraph empty;
    const auto bytes = bytes_of(empty);
    // magic + version + node_count + arc_count + offsets[0]
    CHECK(bytes.size() == 4 + 4 + 8 + 8 + 8);
    CHECK(bytes.substr(0, 4) == "XWLK");
    CHECK(from_bytes(bytes).structurally_equal(empty));
  }

  TEST_CASE("Table 1 graph round-trips byte-identically") {
    const auto g = build_from(table1_records(), true);
    const auto bytes = bytes_of(g);
    std::ostringstream sink;
    CHECK(serialize_graph(g, sink) == bytes.size());
    const auto back = from_bytes(bytes);
    CHECK(back.structurally_equal(g));
    CHECK(bytes_of(back) == bytes);
    CHECK(back.lookup(NodeKind::Tag, "chiffon") == g.lookup(NodeKind::Tag, "chiffon"));
  }

  TEST_CASE("random graphs round-trip structurally") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> size(1, 12);
    for (int trial = 0; trial < 1000; ++trial) {
      test::RandomLogShape shape;
      shape.queries = size(rng);
      shape.listings = size(rng);
      shape.events = 1 + size(rng) * 3;
      const auto g = build_from(test::random_log(rng, shape), trial % 3 == 0);
      const auto bytes = bytes_of(g);
      const auto back = from_bytes(bytes);
      REQUIRE(back.structurally_equal(g));
      REQUIRE(back.validate().ok());
      REQUIRE(bytes_of(back) == bytes);
    }
  }

  TEST_CASE("load errors are distinguished") {
    const auto bytes = bytes_of(build_from(table1_records(), true));

    auto bad_magic = bytes;
    bad_magic[0] = 'Y';
    CHECK(load_error_kind(bad_magic) == LoadErrorKind::BadMagic);

    auto bad_version = bytes;
    bad_version[4] = 2;
    CHECK(load_error_kind(bad_version) == LoadErrorKind::UnsupportedVersion);

    for (std::size_t len = 0; len < bytes.size(); ++len) {
      const auto kind = load_error_kind(bytes.substr(0, len));
      // A cut inside the magic still reads as truncation, never as a bogus graph.
      REQUIRE(kind == LoadErrorKind::Truncated);
    }

    // Flip the last cdf entry to 0.5 so the last node's cdf no longer ends at 1.
    auto bad_cdf = bytes;
    const double half = 0.5;
    std::uint64_t bits;
    std::memcpy(&bits, &half, sizeof(bits));
    for (int i = 0; i < 8; ++i) bad_cdf[bad_cdf.size() - 8 + i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    CHECK(load_error_kind(bad_cdf) == LoadErrorKind::InvariantViolation);

    // A huge arc count must not be trusted for allocation.
    auto huge = bytes;
    for (int i = 0; i < 8; ++i) huge[16 + i] = static_cast<char>(0x7F);
    CHECK(load_error_kind(huge) == LoadErrorKind::Truncated);
  }

  TEST_CASE("validate rejects broken structure") {
    const std::vector<NodeRef> two = {{0, NodeKind::Query, "q"}, {1, NodeKind::Listing, "l"}};
    // One direction only.
    CHECK_THROWS_AS(CsrGraph::from_parts(two, {0, 1, 1}, {1}, {1.0}), InvariantViolation);
    // Same-side arc.
    CHECK_THROWS_AS(CsrGraph::from_parts({{0, NodeKind::Query, "q"}, {1, NodeKind::Shop, "s"}}, {0, 1, 2}, {1, 0},
                                         {1.0, 1.0}),
                    InvariantViolation);
    // Weights in increasing order.
    const std::vector<NodeRef> three = {
        {0, NodeKind::Listing, "l"}, {1, NodeKind::Query, "a"}, {2, NodeKind::Query, "b"}};
    CHECK_THROWS_AS(CsrGraph::from_parts(three, {0, 2, 3, 4}, {1, 2, 0, 0}, {0.25, 1.0, 1.0, 1.0}),
                    InvariantViolation);
    // cdf not ending at 1.
    CHECK_THROWS_AS(CsrGraph::from_parts(two, {0, 1, 2}, {1, 0}, {0.9, 1.0}), InvariantViolation);
    // Duplicate key.
    CHECK_THROWS_AS(CsrGraph::from_parts({{0, NodeKind::Query, "q"}, {1, NodeKind::Query, "q"}}, {0, 0, 0}, {}, {}),
                    InvariantViolation);
    // Offsets out of shape.
    CHECK_THROWS_AS(CsrGraph::from_parts(two, {0, 2}, {1, 0}, {1.0, 1.0}), InvariantViolation);
  }

  TEST_CASE("degree-0 nodes are warnings") {
    const auto g = CsrGraph::from_parts({{0, NodeKind::Query, "q"}, {1, NodeKind::Listing, "l"},
                                         {2, NodeKind::Query, "lonely"}},
                                        {0, 1, 2, 2}, {1, 0}, {1.0, 1.0});
    const auto report = g.validate();
    CHECK(report.ok());
    CHECK(report.warnings.size() == 1);
    CHECK(g.degree(2) == 0);
  }

  TEST_CASE("builder graphs satisfy every invariant") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 300; ++trial) {
      const auto g = build_from(test::random_log(rng, {}), trial % 2 == 1);
      const auto report = g.validate();
      REQUIRE(report.ok());
      CHECK(report.warnings.empty());
      CHECK(g.arc_count() % 2 == 0);
    }
  }
}
