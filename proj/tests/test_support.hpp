#pragma once

// Shared fixtures and brute-force oracles for the test suites. Nothing here
// goes through the CSR arrays: weights come straight from the raw records.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "xwalk/builder.hpp"
#include "xwalk/graph.hpp"

namespace xwalk::test {

inline std::vector<InteractionRecord> table1_records() {
  return {
      {"wedding dress", "l12", Interaction::Click, "s00", {"white", "gown"}, "beautiful bridal wedding gown"},
      {"wedding gown", "l12", Interaction::Purchase, "s00", {"white", "gown"}, "custom embroidered wedding dress"},
      {"wedding dress", "l34", Interaction::Click, "s11", {"fancy", "dress", "chiffon"},
       "ethereal champagne dress with chiffon skirt"},
  };
}

inline std::string table1_log_text() {
  std::ostringstream out;
  for (const auto& r : table1_records()) out << format_interaction_line(r) << '\n';
  return out.str();
}

inline CsrGraph build_from(const std::vector<InteractionRecord>& records, bool extend,
                           WeightCoefficients coeffs = {}) {
  return build_graph(collate_serial(records), {coeffs, extend});
}

struct RandomLogShape {
  std::size_t queries = 6;
  std::size_t listings = 8;
  std::size_t shops = 3;
  std::size_t tags = 5;
  std::size_t events = 30;
};

inline std::vector<InteractionRecord> random_log(std::mt19937_64& rng, const RandomLogShape& shape) {
  std::uniform_int_distribution<std::size_t> q(0, shape.queries - 1), l(0, shape.listings - 1),
      kind(0, 2), tag_count(0, 3), tag(0, shape.tags - 1);
  // Listing metadata is fixed per listing so "last seen" is unambiguous.
  std::vector<std::string> shop_of(shape.listings);
  std::vector<std::vector<std::string>> tags_of(shape.listings);
  for (std::size_t i = 0; i < shape.listings; ++i) {
    shop_of[i] = "s" + std::to_string(i % shape.shops);
    const auto n = tag_count(rng);
    for (std::size_t t = 0; t < n; ++t) tags_of[i].push_back("t" + std::to_string(tag(rng)));
  }
  std::vector<InteractionRecord> out;
  for (std::size_t e = 0; e < shape.events; ++e) {
    const auto li = l(rng);
    InteractionRecord r;
    r.query = "query " + std::to_string(q(rng));
    r.listing_id = "l" + std::to_string(li);
    r.interaction = static_cast<Interaction>(kind(rng));
    r.shop_id = shop_of[li];
    r.tags = tags_of[li];
    r.title = "title " + std::to_string(li);
    out.push_back(std::move(r));
  }
  return out;
}

using NodeName = std::pair<NodeKind, std::string>;

/// Undirected weight table computed directly from records.
struct WeightTable {
  std::map<NodeName, std::map<NodeName, double>> adj;

  double total(const NodeName& n) const {
    double s = 0;
    auto it = adj.find(n);
    if (it == adj.end()) return 0.0;
    for (const auto& [m, w] : it->second) s += w;
    return s;
  }
};

inline WeightTable weight_table(const std::vector<InteractionRecord>& records, const WeightCoefficients& c,
                                bool extend) {
  WeightTable t;
  std::map<std::pair<std::string, std::string>, double> pair_weight;
  std::map<std::string, std::pair<std::string, std::vector<std::string>>> meta;
  for (const auto& r : records) {
    double w = r.interaction == Interaction::Click ? c.click
                                                   : (r.interaction == Interaction::Cart ? c.cart : c.purchase);
    pair_weight[{normalize_query(r.query), r.listing_id}] += w;
    meta[r.listing_id] = {r.shop_id, r.tags};
  }
  std::set<std::string> listings;
  for (const auto& [k, w] : pair_weight) {
    if (w <= 0) continue;
    NodeName q{NodeKind::Query, k.first}, l{NodeKind::Listing, k.second};
    t.adj[q][l] += w;
    t.adj[l][q] += w;
    listings.insert(k.second);
  }
  if (extend) {
    for (const auto& l : listings) {
      const auto& [shop, tags] = meta[l];
      NodeName ln{NodeKind::Listing, l};
      if (!shop.empty()) {
        t.adj[{NodeKind::Shop, shop}][ln] = 1.0;
        t.adj[ln][{NodeKind::Shop, shop}] = 1.0;
      }
      for (const auto& tag : tags) {
        if (tag.empty()) continue;
        t.adj[{NodeKind::Tag, tag}][ln] = 1.0;
        t.adj[ln][{NodeKind::Tag, tag}] = 1.0;
      }
    }
  }
  return t;
}

/// Exact distribution after `hops` transitions from `start` (transition-matrix power).
inline std::map<NodeName, double> exact_hop_distribution(const WeightTable& t, const NodeName& start,
                                                         std::uint32_t hops) {
  std::map<NodeName, double> dist{{start, 1.0}};
  for (std::uint32_t h = 0; h < hops; ++h) {
    std::map<NodeName, double> next;
    for (const auto& [node, p] : dist) {
      const double total = t.total(node);
      for (const auto& [m, w] : t.adj.at(node)) next[m] += p * w / total;
    }
    dist = std::move(next);
  }
  return dist;
}

inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(p[i] - q[i]);
  return 0.5 * s;
}

inline std::vector<double> cdf_from_weights(const std::vector<double>& w) {
  double total = 0;
  for (double x : w) total += x;
  std::vector<double> cdf;
  double run = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    run += w[i];
    cdf.push_back(i + 1 == w.size() ? 1.0 : run / total);
  }
  return cdf;
}

}  // namespace xwalk::test
