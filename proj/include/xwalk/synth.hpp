#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "xwalk/builder.hpp"
#include "xwalk/eval.hpp"

namespace xwalk {

/// Parameters of the synthetic interaction log.
struct SyntheticLogSpec {
  std::size_t num_queries = 1000;
  std::size_t num_listings = 10000;
  std::size_t num_shops = 500;
  std::size_t tag_vocab_size = 2000;
  std::size_t cluster_count = 20;
  double zipf_exponent = 1.0;
  std::size_t events = 100000;
  std::uint64_t seed = 42;

  std::size_t eval_queries = 2000;
  /// Share of queries (outside the top tenth) that never occur in the training log.
  double novel_query_fraction = 0.05;
  /// Listings per cluster that receive interactions; the rest exist only in the catalog.
  std::size_t active_listings_per_cluster = 64;
  std::size_t preferred_per_query = 8;
  /// Share of training events whose listing is in the query's cluster.
  double in_cluster_fraction = 1.0;
  /// Share of relevant eval listings drawn from the catalog outside the active pool.
  double fresh_relevant_fraction = 0.1;
  /// Extra pick weight per title word shared with the query when choosing preferred
  /// and relevant listings. 0 makes relevance independent of wording.
  double lexical_bias = 1.0;

  /// Throws std::invalid_argument.
  void check() const;
};

struct SyntheticQuery {
  std::string text;
  std::size_t cluster = 0;
  bool novel = false;  // absent from the training log
};

struct EvalQuery {
  std::string qid;
  std::string text;
  std::size_t rank = 0;  // popularity rank, index into SyntheticData::queries
};

struct SyntheticData {
  std::vector<SyntheticQuery> queries;  // in popularity rank order
  std::vector<InteractionRecord> log;
  std::vector<std::pair<std::string, std::string>> corpus;  // (listing id, title) for every listing
  std::vector<std::size_t> listing_cluster;
  std::vector<std::size_t> training_ranks;  // popularity rank of the query behind each log record
  std::vector<EvalQuery> eval;
  Qrels qrels;
  std::map<std::string, std::uint64_t> frequencies;  // eval qid -> training count of its text
};

SyntheticData generate_synthetic_log(const SyntheticLogSpec& spec);

}  // namespace xwalk
