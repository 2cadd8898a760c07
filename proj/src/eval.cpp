#include "xwalk/eval.hpp"

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace xwalk {

std::string_view to_string(PopularityBin bin) {
  switch (bin) {
    case PopularityBin::Tail: return "tail";
    case PopularityBin::Torso: return "torso";
    case PopularityBin::Head: return "head";
  }
  return "tail";
}

double recall_at_k(const std::vector<RunEntry>& ranked, const std::set<std::string>& relevant, std::size_t k) {
  if (relevant.empty()) return 0.0;
  const std::size_t depth = std::min(k, ranked.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < depth; ++i) hits += relevant.count(ranked[i].doc);
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double average_precision_at_k(const std::vector<RunEntry>& ranked, const std::set<std::string>& relevant,
                              std::size_t k) {
  if (relevant.empty()) return 0.0;
  const std::size_t depth = std::min(k, ranked.size());
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < depth; ++i) {
    if (relevant.count(ranked[i].doc)) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(relevant.size());
}

namespace {

template <typename PerQuery>
double mean_over_qrels(const RunList& run, const Qrels& qrels, PerQuery per_query) {
  if (qrels.empty()) return 0.0;
  static const std::vector<RunEntry> kEmpty;
  double sum = 0.0;
  for (const auto& [qid, relevant] : qrels) {
    auto it = run.find(qid);
    sum += per_query(it == run.end() ? kEmpty : it->second, relevant);
  }
  return sum / static_cast<double>(qrels.size());
}

}  // namespace

double recall_at_k(const RunList& run, const Qrels& qrels, std::size_t k) {
  return mean_over_qrels(run, qrels, [k](const auto& ranked, const auto& rel) { return recall_at_k(ranked, rel, k); });
}

double map_at_k(const RunList& run, const Qrels& qrels, std::size_t k) {
  return mean_over_qrels(run, qrels,
                         [k](const auto& ranked, const auto& rel) { return average_precision_at_k(ranked, rel, k); });
}

std::vector<std::string> unjudged_queries(const RunList& run, const Qrels& qrels) {
  std::vector<std::string> out;
  for (const auto& [qid, entries] : run) {
    if (!qrels.count(qid)) out.push_back(qid);
  }
  return out;
}

FrequencyBinAssignment assign_bins(const std::map<std::string, std::uint64_t>& frequencies) {
  if (frequencies.size() < 3) throw std::invalid_argument("popularity binning needs at least 3 queries");

  std::vector<std::pair<std::string, std::uint64_t>> order(frequencies.begin(), frequencies.end());
  // std::map iteration is already ascending by id, so a stable sort on frequency keeps id order for ties.
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second < b.second; });

  std::uint64_t total = 0;
  for (const auto& [q, f] : order) total += f;

  FrequencyBinAssignment out;
  out.frequencies = frequencies;
  std::uint64_t cumulative = 0;
  for (const auto& [q, f] : order) {
    cumulative += f;
    // Compare 3 * cumulative against multiples of the total to stay in integers.
    PopularityBin bin = PopularityBin::Head;
    if (3 * cumulative <= total) {
      bin = PopularityBin::Tail;
    } else if (3 * cumulative <= 2 * total) {
      bin = PopularityBin::Torso;
    }
    out.bins.emplace(q, bin);
  }
  return out;
}

RunList rrf_fuse(const std::vector<RunList>& runs, std::size_t kappa) {
  if (runs.empty()) throw std::invalid_argument("rrf_fuse needs at least one run");
  std::set<std::string> qids;
  for (const auto& run : runs) {
    for (const auto& [qid, entries] : run) qids.insert(qid);
  }

  RunList fused;
  for (const auto& qid : qids) {
    std::unordered_map<std::string, double> scores;
    for (const auto& run : runs) {
      auto it = run.find(qid);
      if (it == run.end()) continue;
      for (std::size_t i = 0; i < it->second.size(); ++i) {
        scores[it->second[i].doc] += 1.0 / static_cast<double>(kappa + i + 1);
      }
    }
    std::vector<RunEntry> entries;
    entries.reserve(scores.size());
    for (auto& [doc, s] : scores) entries.push_back({doc, s});
    std::sort(entries.begin(), entries.end(), [](const RunEntry& a, const RunEntry& b) {
      return a.score != b.score ? a.score > b.score : a.doc < b.doc;
    });
    fused.emplace(qid, std::move(entries));
  }
  return fused;
}

Report evaluate(const std::vector<std::pair<std::string, RunList>>& runs, const Qrels& qrels,
                const FrequencyBinAssignment& bins) {
  Qrels by_bin[3];
  for (const auto& [qid, rel] : qrels) {
    auto it = bins.bins.find(qid);
    if (it != bins.bins.end()) by_bin[static_cast<int>(it->second)].emplace(qid, rel);
  }

  Report report;
  for (const auto& [name, run] : runs) {
    ReportRow row;
    row.name = name;
    row.recall_100 = recall_at_k(run, qrels, 100);
    row.recall_1000 = recall_at_k(run, qrels, 1000);
    row.map_100 = map_at_k(run, qrels, 100);
    row.map_1000 = map_at_k(run, qrels, 1000);
    row.recall_1000_tail = recall_at_k(run, by_bin[0], 1000);
    row.recall_1000_torso = recall_at_k(run, by_bin[1], 1000);
    row.recall_1000_head = recall_at_k(run, by_bin[2], 1000);
    row.queries_tail = by_bin[0].size();
    row.queries_torso = by_bin[1].size();
    row.queries_head = by_bin[2].size();
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_report(std::ostream& out, const Report& report) {
  std::size_t width = 4;
  for (const auto& r : report.rows) width = std::max(width, r.name.size());
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::fixed << std::setprecision(3);

  out << std::left << std::setw(static_cast<int>(width)) << "run" << std::right << std::setw(9) << "r@100"
      << std::setw(9) << "r@1000" << std::setw(9) << "M@100" << std::setw(9) << "M@1000" << '\n';
  for (const auto& r : report.rows) {
    out << std::left << std::setw(static_cast<int>(width)) << r.name << std::right << std::setw(9) << r.recall_100
        << std::setw(9) << r.recall_1000 << std::setw(9) << r.map_100 << std::setw(9) << r.map_1000 << '\n';
  }
  out << '\n';
  out << std::left << std::setw(static_cast<int>(width)) << "run" << std::right << std::setw(9) << "tail"
      << std::setw(9) << "torso" << std::setw(9) << "head" << "   (recall@1000)\n";
  for (const auto& r : report.rows) {
    out << std::left << std::setw(static_cast<int>(width)) << r.name << std::right << std::setw(9)
        << r.recall_1000_tail << std::setw(9) << r.recall_1000_torso << std::setw(9) << r.recall_1000_head << '\n';
  }
  out << '\n';

  out << std::setprecision(6);
  for (const auto& r : report.rows) {
    out << r.name << ".r@100=" << r.recall_100 << '\n';
    out << r.name << ".r@1000=" << r.recall_1000 << '\n';
    out << r.name << ".map@100=" << r.map_100 << '\n';
    out << r.name << ".map@1000=" << r.map_1000 << '\n';
    out << r.name << ".tail.r@1000=" << r.recall_1000_tail << '\n';
    out << r.name << ".torso.r@1000=" << r.recall_1000_torso << '\n';
    out << r.name << ".head.r@1000=" << r.recall_1000_head << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

// ---------------------------------------------------------------------------
// TREC formats

namespace {

std::vector<std::string> fields(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string f;
  while (ss >> f) out.push_back(f);
  return out;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

template <typename T>
T parse_number(const std::string& text, std::size_t line, const char* what) {
  T value{};
  if constexpr (std::is_floating_point_v<T>) {
    try {
      std::size_t used = 0;
      value = static_cast<T>(std::stod(text, &used));
      if (used != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      throw FormatError(line, std::string("invalid ") + what + " '" + text + "'");
    }
  } else {
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw FormatError(line, std::string("invalid ") + what + " '" + text + "'");
    }
  }
  return value;
}

}  // namespace

RunList read_run(std::istream& in) {
  struct Row {
    std::uint64_t rank;
    std::size_t order;
    RunEntry entry;
  };
  std::map<std::string, std::vector<Row>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t order = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto f = fields(line);
    if (f.size() != 6) throw FormatError(line_no, "expected 'qid Q0 docid rank score tag'");
    const auto rank = parse_number<std::uint64_t>(f[3], line_no, "rank");
    const auto score = parse_number<double>(f[4], line_no, "score");
    rows[f[0]].push_back({rank, order++, {f[2], score}});
  }

  RunList run;
  for (auto& [qid, list] : rows) {
    std::sort(list.begin(), list.end(),
              [](const Row& a, const Row& b) { return std::tie(a.rank, a.order) < std::tie(b.rank, b.order); });
    std::unordered_set<std::string> seen;
    auto& entries = run[qid];
    for (auto& r : list) {
      if (seen.insert(r.entry.doc).second) entries.push_back(std::move(r.entry));
    }
  }
  return run;
}

void write_run(std::ostream& out, const RunList& run, const std::string& tag) {
  const auto precision = out.precision();
  out << std::setprecision(10);
  for (const auto& [qid, entries] : run) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      out << qid << " Q0 " << entries[i].doc << ' ' << (i + 1) << ' ' << entries[i].score << ' ' << tag << '\n';
    }
  }
  out.precision(precision);
}

Qrels read_qrels(std::istream& in) {
  Qrels qrels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto f = fields(line);
    if (f.size() != 4) throw FormatError(line_no, "expected 'qid 0 docid relevance'");
    const auto rel = parse_number<std::int64_t>(f[3], line_no, "relevance");
    if (rel > 0) qrels[f[0]].insert(f[2]);
  }
  return qrels;
}

void write_qrels(std::ostream& out, const Qrels& qrels) {
  for (const auto& [qid, docs] : qrels) {
    for (const auto& d : docs) out << qid << " 0 " << d << " 1\n";
  }
}

std::map<std::string, std::uint64_t> read_frequencies(std::istream& in) {
  std::map<std::string, std::uint64_t> freqs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto f = fields(line);
    if (f.size() != 2) throw FormatError(line_no, "expected 'qid count'");
    freqs[f[0]] = parse_number<std::uint64_t>(f[1], line_no, "count");
  }
  return freqs;
}

void write_frequencies(std::ostream& out, const std::map<std::string, std::uint64_t>& frequencies) {
  for (const auto& [qid, n] : frequencies) out << qid << ' ' << n << '\n';
}

std::vector<RunEntry> to_run_entries(const RankedResult& result) {
  std::vector<RunEntry> out;
  out.reserve(result.results.size());
  for (const auto& r : result.results) out.push_back({r.listing, r.score});
  return out;
}

}  // namespace xwalk
