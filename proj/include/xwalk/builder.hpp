#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xwalk/graph.hpp"

namespace xwalk {

enum class Interaction : std::uint8_t { Click, Cart, Purchase };

std::optional<Interaction> parse_interaction(std::string_view text);
std::string_view to_string(Interaction interaction);

struct InteractionRecord {
  std::string query;
  std::string listing_id;
  Interaction interaction = Interaction::Click;
  std::string shop_id;
  std::vector<std::string> tags;
  std::optional<std::string> title;

  bool operator==(const InteractionRecord&) const = default;
};

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct LogParseResult {
  std::vector<InteractionRecord> records;
  std::vector<LineError> errors;
  std::size_t lines = 0;  // non-blank lines seen

  /// True when more than `max_fraction` of the non-blank lines were malformed.
  bool exceeds_error_rate(double max_fraction = 0.01) const;
};

class LogParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses one newline-delimited JSON object. Throws LogParseError on malformed input.
InteractionRecord parse_interaction_line(std::string_view line);

/// Parses every line; malformed lines are collected with their line numbers.
LogParseResult parse_interaction_log(std::istream& source);

/// Throws LogParseError if the malformed-line rate is above `max_fraction`.
void check_error_rate(const LogParseResult& result, double max_fraction = 0.01);

std::string format_interaction_line(const InteractionRecord& record);

/// Trim, collapse internal whitespace runs to one space, lowercase (ASCII).
std::string normalize_query(std::string_view text);

struct CollatedPair {
  std::string query;
  std::string listing_id;
  std::uint64_t clicks = 0;
  std::uint64_t carts = 0;
  std::uint64_t purchases = 0;

  bool operator==(const CollatedPair&) const = default;
};

struct ListingMeta {
  std::string shop_id;
  std::vector<std::string> tags;
  std::optional<std::string> title;

  bool operator==(const ListingMeta&) const = default;
};

struct CollatedLog {
  std::vector<CollatedPair> pairs;  // sorted by (query, listing_id)
  std::map<std::string, ListingMeta> listings;
};

/// Groups records by (normalized query, listing id). Listing metadata keeps
/// the last record seen for each listing. Work is sharded across OpenMP
/// threads by pair hash.
CollatedLog collate(const std::vector<InteractionRecord>& records);

/// Single-threaded reference for collate(); same output.
CollatedLog collate_serial(const std::vector<InteractionRecord>& records);

struct WeightCoefficients {
  double click = 1.0;
  double cart = 3.0;
  double purchase = 10.0;

  /// Throws std::invalid_argument for negative or all-zero coefficients.
  void check() const;
  bool strictly_increasing() const { return click < cart && cart < purchase; }
};

double edge_weight(const CollatedPair& pair, const WeightCoefficients& coeffs);

struct BuildOptions {
  WeightCoefficients coeffs;
  bool extend = false;  // add shop and tag nodes
};

struct BuildStats {
  std::size_t dropped_pairs = 0;  // pairs whose weight came out as zero
  std::vector<std::string> warnings;
};

/// Packs collated pairs into a validated CsrGraph.
///
/// Node ids: queries, then listings, then shops, then tags, each block in
/// ascending key order, so the result does not depend on pair order.
/// Throws std::invalid_argument when there are no pairs and InvariantViolation
/// if the packed graph fails validation.
CsrGraph build_graph(const CollatedLog& log, const BuildOptions& options, BuildStats* stats = nullptr);

}  // namespace xwalk
