#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xwalk/walk.hpp"

namespace xwalk {

/// Lowercases and splits on any non-alphanumeric ASCII character.
std::vector<std::string> tokenize(std::string_view text);

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct Posting {
  std::uint32_t doc = 0;
  std::uint32_t tf = 0;

  bool operator==(const Posting&) const = default;
};

/// In-memory BM25 index over listing titles.
class Bm25Index {
 public:
  /// Duplicate listing ids keep the last title. Documents are numbered in
  /// ascending listing id order.
  static Bm25Index build(const std::vector<std::pair<std::string, std::string>>& docs, Bm25Params params = {});

  std::size_t doc_count() const { return doc_keys_.size(); }
  double avg_doc_length() const { return avg_doc_length_; }
  const std::vector<std::uint32_t>& doc_lengths() const { return doc_lengths_; }
  const std::vector<std::string>& doc_keys() const { return doc_keys_; }
  const Bm25Params& params() const { return params_; }
  bool empty_corpus() const { return total_tokens_ == 0; }

  const std::vector<Posting>* postings(const std::string& term) const;
  std::size_t term_count() const { return postings_.size(); }

  /// Lucene-style idf: ln(1 + (N - df + 0.5) / (df + 0.5)).
  double idf(std::size_t df) const;

  /// Top-k documents with positive score, ties by ascending listing id.
  RankedResult search(std::string_view query, std::size_t k) const;

 private:
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::vector<std::uint32_t> doc_lengths_;
  std::vector<std::string> doc_keys_;
  double avg_doc_length_ = 0.0;
  std::uint64_t total_tokens_ = 0;
  Bm25Params params_;
};

inline Bm25Index build_index(const std::vector<std::pair<std::string, std::string>>& docs, double k1 = 1.2,
                             double b = 0.75) {
  return Bm25Index::build(docs, {k1, b});
}

/// Reads `listing_id<TAB>title` lines.
std::vector<std::pair<std::string, std::string>> read_corpus(std::istream& in);

}  // namespace xwalk
