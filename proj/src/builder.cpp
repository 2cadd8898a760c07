#include "xwalk/builder.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <istream>
#include <set>
#include <unordered_map>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace xwalk {

using json = nlohmann::json;

std::optional<Interaction> parse_interaction(std::string_view text) {
  if (text == "click") return Interaction::Click;
  if (text == "cart") return Interaction::Cart;
  if (text == "purchase") return Interaction::Purchase;
  return std::nullopt;
}

std::string_view to_string(Interaction interaction) {
  switch (interaction) {
    case Interaction::Click: return "click";
    case Interaction::Cart: return "cart";
    case Interaction::Purchase: return "purchase";
  }
  return "click";
}

std::string normalize_query(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

namespace {

std::string required_string(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) throw LogParseError(std::string("missing field '") + field + "'");
  if (!it->is_string()) throw LogParseError(std::string("field '") + field + "' is not a string");
  return it->get<std::string>();
}

}  // namespace

InteractionRecord parse_interaction_line(std::string_view line) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw LogParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw LogParseError("record is not a JSON object");

  InteractionRecord rec;
  rec.query = required_string(obj, "query");
  rec.listing_id = required_string(obj, "listing_id");
  if (normalize_query(rec.query).empty()) throw LogParseError("empty query");
  if (rec.listing_id.empty()) throw LogParseError("empty listing_id");

  const auto kind = required_string(obj, "interaction");
  auto interaction = parse_interaction(kind);
  if (!interaction) throw LogParseError("unknown interaction '" + kind + "'");
  rec.interaction = *interaction;

  rec.shop_id = required_string(obj, "shop_id");

  if (auto it = obj.find("tags"); it != obj.end()) {
    if (!it->is_array()) throw LogParseError("field 'tags' is not an array");
    for (const auto& t : *it) {
      if (!t.is_string()) throw LogParseError("tag is not a string");
      rec.tags.push_back(t.get<std::string>());
    }
  } else {
    throw LogParseError("missing field 'tags'");
  }

  if (auto it = obj.find("title"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw LogParseError("field 'title' is not a string");
    rec.title = it->get<std::string>();
  }
  return rec;
}

bool LogParseResult::exceeds_error_rate(double max_fraction) const {
  if (lines == 0) return false;
  return static_cast<double>(errors.size()) > max_fraction * static_cast<double>(lines);
}

LogParseResult parse_interaction_log(std::istream& source) {
  LogParseResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    ++result.lines;
    try {
      result.records.push_back(parse_interaction_line(line));
    } catch (const LogParseError& e) {
      result.errors.push_back({line_no, e.what()});
    }
  }
  return result;
}

void check_error_rate(const LogParseResult& result, double max_fraction) {
  if (!result.exceeds_error_rate(max_fraction)) return;
  const auto& first = result.errors.front();
  throw LogParseError(std::to_string(result.errors.size()) + " of " + std::to_string(result.lines) +
                      " lines malformed (first at line " + std::to_string(first.line) + ": " + first.message + ")");
}

std::string format_interaction_line(const InteractionRecord& record) {
  json obj = {
      {"query", record.query},
      {"listing_id", record.listing_id},
      {"interaction", std::string(to_string(record.interaction))},
      {"shop_id", record.shop_id},
      {"tags", record.tags},
  };
  if (record.title) obj["title"] = *record.title;
  return obj.dump();
}

// ---------------------------------------------------------------------------
// Collation

namespace {

struct PairKey {
  std::string query;
  std::string listing_id;
  bool operator==(const PairKey&) const = default;
};

struct PairKeyHash {
  std::size_t operator()(const PairKey& k) const {
    auto h = std::hash<std::string>{}(k.query);
    return h ^ (std::hash<std::string>{}(k.listing_id) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  }
};

using PairCounts = std::unordered_map<PairKey, CollatedPair, PairKeyHash>;

void count_into(PairCounts& counts, PairKey key, Interaction interaction) {
  auto [it, inserted] = counts.try_emplace(std::move(key));
  auto& pair = it->second;
  if (inserted) {
    pair.query = it->first.query;
    pair.listing_id = it->first.listing_id;
  }
  switch (interaction) {
    case Interaction::Click: ++pair.clicks; break;
    case Interaction::Cart: ++pair.carts; break;
    case Interaction::Purchase: ++pair.purchases; break;
  }
}

std::map<std::string, ListingMeta> collect_listing_meta(const std::vector<InteractionRecord>& records) {
  std::map<std::string, ListingMeta> listings;
  for (const auto& r : records) {
    auto& meta = listings[r.listing_id];
    meta.shop_id = r.shop_id;
    meta.tags = r.tags;
    meta.title = r.title;
  }
  return listings;
}

void sort_pairs(std::vector<CollatedPair>& pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const CollatedPair& a, const CollatedPair& b) {
    return std::tie(a.query, a.listing_id) < std::tie(b.query, b.listing_id);
  });
}

}  // namespace

CollatedLog collate_serial(const std::vector<InteractionRecord>& records) {
  PairCounts counts;
  for (const auto& r : records) count_into(counts, {normalize_query(r.query), r.listing_id}, r.interaction);

  CollatedLog out;
  out.pairs.reserve(counts.size());
  for (auto& [key, pair] : counts) out.pairs.push_back(std::move(pair));
  sort_pairs(out.pairs);
  out.listings = collect_listing_meta(records);
  return out;
}

CollatedLog collate(const std::vector<InteractionRecord>& records) {
  const std::size_t n = records.size();
  std::vector<PairKey> keys(n);
  std::vector<std::size_t> hashes(n);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    keys[i] = {normalize_query(records[i].query), records[i].listing_id};
    hashes[i] = PairKeyHash{}(keys[i]);
  }

  int shards = 1;
#ifdef _OPENMP
  shards = omp_get_max_threads();
#endif
  std::vector<std::vector<CollatedPair>> shard_pairs(shards);

  // Each shard owns the pairs whose hash maps to it, so shards never share keys.
#pragma omp parallel for schedule(static, 1)
  for (int s = 0; s < shards; ++s) {
    PairCounts counts;
    for (std::size_t i = 0; i < n; ++i) {
      if (hashes[i] % static_cast<std::size_t>(shards) != static_cast<std::size_t>(s)) continue;
      count_into(counts, keys[i], records[i].interaction);
    }
    auto& local = shard_pairs[s];
    local.reserve(counts.size());
    for (auto& [key, pair] : counts) local.push_back(std::move(pair));
  }

  CollatedLog out;
  for (auto& local : shard_pairs) {
    out.pairs.insert(out.pairs.end(), std::make_move_iterator(local.begin()), std::make_move_iterator(local.end()));
  }
  sort_pairs(out.pairs);
  out.listings = collect_listing_meta(records);
  return out;
}

// ---------------------------------------------------------------------------
// Weighting and packing

void WeightCoefficients::check() const {
  if (click < 0 || cart < 0 || purchase < 0) throw std::invalid_argument("weight coefficients must be non-negative");
  if (click == 0 && cart == 0 && purchase == 0) throw std::invalid_argument("weight coefficients are all zero");
}

double edge_weight(const CollatedPair& pair, const WeightCoefficients& coeffs) {
  return coeffs.click * static_cast<double>(pair.clicks) + coeffs.cart * static_cast<double>(pair.carts) +
         coeffs.purchase * static_cast<double>(pair.purchases);
}

namespace {

struct Arc {
  NodeId target;
  double weight;
};

class NodeTable {
 public:
  NodeId add_block(NodeKind kind, const std::set<std::string>& keys) {
    const NodeId first = nodes_.size();
    for (const auto& k : keys) {
      const NodeId id = nodes_.size();
      nodes_.push_back({id, kind, k});
      ids_[static_cast<std::size_t>(kind)].emplace(k, id);
    }
    return first;
  }

  NodeId id(NodeKind kind, const std::string& key) const { return ids_[static_cast<std::size_t>(kind)].at(key); }

  std::vector<NodeRef> take() { return std::move(nodes_); }
  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<NodeRef> nodes_;
  std::unordered_map<std::string, NodeId> ids_[kNodeKindCount];
};

}  // namespace

CsrGraph build_graph(const CollatedLog& log, const BuildOptions& options, BuildStats* stats) {
  options.coeffs.check();
  if (log.pairs.empty()) throw std::invalid_argument("cannot build a graph from zero interaction pairs");

  BuildStats local_stats;
  BuildStats& st = stats ? *stats : local_stats;
  if (!options.coeffs.strictly_increasing()) {
    st.warnings.push_back("weight coefficients do not satisfy click < cart < purchase");
  }

  struct WeightedPair {
    const CollatedPair* pair;
    double weight;
  };
  std::vector<WeightedPair> kept;
  kept.reserve(log.pairs.size());
  std::set<std::string> queries, listings;
  for (const auto& p : log.pairs) {
    const double w = edge_weight(p, options.coeffs);
    if (!(w > 0.0)) {
      ++st.dropped_pairs;
      continue;
    }
    kept.push_back({&p, w});
    queries.insert(p.query);
    listings.insert(p.listing_id);
  }
  if (st.dropped_pairs > 0) {
    st.warnings.push_back(std::to_string(st.dropped_pairs) + " pairs dropped with zero weight");
  }
  if (kept.empty()) throw std::invalid_argument("every interaction pair has zero weight");

  std::set<std::string> shops, tags;
  if (options.extend) {
    for (const auto& l : listings) {
      auto it = log.listings.find(l);
      if (it == log.listings.end()) continue;
      if (!it->second.shop_id.empty()) shops.insert(it->second.shop_id);
      for (const auto& t : it->second.tags) {
        if (!t.empty()) tags.insert(t);
      }
    }
  }

  NodeTable table;
  table.add_block(NodeKind::Query, queries);
  table.add_block(NodeKind::Listing, listings);
  table.add_block(NodeKind::Shop, shops);
  table.add_block(NodeKind::Tag, tags);

  std::vector<std::vector<Arc>> adjacency(table.size());
  auto connect = [&](NodeId a, NodeId b, double w) {
    adjacency[a].push_back({b, w});
    adjacency[b].push_back({a, w});
  };

  for (const auto& [pair, w] : kept) {
    connect(table.id(NodeKind::Query, pair->query), table.id(NodeKind::Listing, pair->listing_id), w);
  }
  if (options.extend) {
    for (const auto& l : listings) {
      auto it = log.listings.find(l);
      if (it == log.listings.end()) continue;
      const NodeId listing = table.id(NodeKind::Listing, l);
      if (!it->second.shop_id.empty()) connect(table.id(NodeKind::Shop, it->second.shop_id), listing, 1.0);
      std::set<std::string> unique_tags(it->second.tags.begin(), it->second.tags.end());
      for (const auto& t : unique_tags) {
        if (!t.empty()) connect(table.id(NodeKind::Tag, t), listing, 1.0);
      }
    }
  }

  std::vector<std::uint64_t> offsets(table.size() + 1, 0);
  std::vector<NodeId> targets;
  std::vector<double> cdf;
  std::size_t arc_total = 0;
  for (const auto& arcs : adjacency) arc_total += arcs.size();
  targets.reserve(arc_total);
  cdf.reserve(arc_total);

  for (std::size_t n = 0; n < adjacency.size(); ++n) {
    auto& arcs = adjacency[n];
    std::sort(arcs.begin(), arcs.end(), [](const Arc& a, const Arc& b) {
      if (a.weight != b.weight) return a.weight > b.weight;
      return a.target < b.target;
    });
    double total = 0.0;
    for (const auto& a : arcs) total += a.weight;
    double running = 0.0;
    for (std::size_t i = 0; i < arcs.size(); ++i) {
      running += arcs[i].weight;
      targets.push_back(arcs[i].target);
      cdf.push_back(i + 1 == arcs.size() ? 1.0 : running / total);
    }
    offsets[n + 1] = targets.size();
  }

  return CsrGraph::from_parts(table.take(), std::move(offsets), std::move(targets), std::move(cdf));
}

}  // namespace xwalk
