#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "xwalk/walk.hpp"

namespace xwalk {

struct RunEntry {
  std::string doc;
  double score = 0.0;

  bool operator==(const RunEntry&) const = default;
};

/// Ranked documents per query instance id, best first, no duplicates.
using RunList = std::map<std::string, std::vector<RunEntry>>;

/// Relevant (purchased) listings per query instance id.
using Qrels = std::map<std::string, std::set<std::string>>;

enum class PopularityBin { Tail, Torso, Head };
std::string_view to_string(PopularityBin bin);

struct FrequencyBinAssignment {
  std::map<std::string, PopularityBin> bins;
  std::map<std::string, std::uint64_t> frequencies;
};

class FormatError : public std::runtime_error {
 public:
  FormatError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Mean over qrels queries of |relevant in top k| / |relevant|. Missing queries score 0.
double recall_at_k(const RunList& run, const Qrels& qrels, std::size_t k);

/// Mean over qrels queries of AP@k with |relevant| as the denominator.
double map_at_k(const RunList& run, const Qrels& qrels, std::size_t k);

double recall_at_k(const std::vector<RunEntry>& ranked, const std::set<std::string>& relevant, std::size_t k);
double average_precision_at_k(const std::vector<RunEntry>& ranked, const std::set<std::string>& relevant,
                              std::size_t k);

/// Query ids present in the run but absent from the qrels (ignored by the metrics).
std::vector<std::string> unjudged_queries(const RunList& run, const Qrels& qrels);

/// Splits queries into tail/torso/head with roughly equal request mass per bin.
/// Throws std::invalid_argument with fewer than 3 queries.
FrequencyBinAssignment assign_bins(const std::map<std::string, std::uint64_t>& frequencies);

inline constexpr std::size_t kDefaultRrfKappa = 60;

/// Reciprocal rank fusion: score(d) = sum over runs of 1 / (kappa + rank), rank from 1.
RunList rrf_fuse(const std::vector<RunList>& runs, std::size_t kappa = kDefaultRrfKappa);

struct ReportRow {
  std::string name;
  double recall_100 = 0, recall_1000 = 0, map_100 = 0, map_1000 = 0;
  double recall_1000_tail = 0, recall_1000_torso = 0, recall_1000_head = 0;
  std::size_t queries_tail = 0, queries_torso = 0, queries_head = 0;
};

struct Report {
  std::vector<ReportRow> rows;
};

/// Overall r@100, r@1000, MAP@100, MAP@1000 and recall@1000 per popularity bin.
/// Queries missing from `bins` are left out of the per-bin figures.
Report evaluate(const std::vector<std::pair<std::string, RunList>>& runs, const Qrels& qrels,
                const FrequencyBinAssignment& bins);

/// Aligned plain-text tables followed by `run.metric=value` lines.
void write_report(std::ostream& out, const Report& report);

// TREC formats

RunList read_run(std::istream& in);
void write_run(std::ostream& out, const RunList& run, const std::string& tag);
Qrels read_qrels(std::istream& in);
void write_qrels(std::ostream& out, const Qrels& qrels);
std::map<std::string, std::uint64_t> read_frequencies(std::istream& in);
void write_frequencies(std::ostream& out, const std::map<std::string, std::uint64_t>& frequencies);

/// RankedResult entries as run entries, keeping order.
std::vector<RunEntry> to_run_entries(const RankedResult& result);

}  // namespace xwalk
