#include "xwalk/bm25.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <map>
#include <stdexcept>

namespace xwalk {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

Bm25Index Bm25Index::build(const std::vector<std::pair<std::string, std::string>>& docs, Bm25Params params) {
  if (docs.empty()) throw std::invalid_argument("cannot index an empty corpus");

  std::map<std::string, std::string> latest;
  for (const auto& [key, title] : docs) latest[key] = title;

  Bm25Index idx;
  idx.params_ = params;
  idx.doc_keys_.reserve(latest.size());
  idx.doc_lengths_.reserve(latest.size());
  for (const auto& [key, title] : latest) {
    const auto doc = static_cast<std::uint32_t>(idx.doc_keys_.size());
    idx.doc_keys_.push_back(key);
    const auto terms = tokenize(title);
    idx.doc_lengths_.push_back(static_cast<std::uint32_t>(terms.size()));
    idx.total_tokens_ += terms.size();

    std::map<std::string, std::uint32_t> tf;
    for (const auto& t : terms) ++tf[t];
    for (const auto& [term, f] : tf) idx.postings_[term].push_back({doc, f});
  }
  idx.avg_doc_length_ = static_cast<double>(idx.total_tokens_) / static_cast<double>(idx.doc_keys_.size());
  return idx;
}

const std::vector<Posting>* Bm25Index::postings(const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? nullptr : &it->second;
}

double Bm25Index::idf(std::size_t df) const {
  const double n = static_cast<double>(doc_count());
  const double d = static_cast<double>(df);
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

RankedResult Bm25Index::search(std::string_view query, std::size_t k) const {
  RankedResult result;
  result.query = std::string(query);
  if (k == 0 || empty_corpus()) return result;

  // Repeated query terms count once per occurrence, as in a bag-of-words query.
  std::unordered_map<std::uint32_t, double> scores;
  for (const auto& term : tokenize(query)) {
    const auto* list = postings(term);
    if (!list) continue;
    const double w = idf(list->size());
    for (const auto& p : *list) {
      const double tf = p.tf;
      const double norm = 1.0 - params_.b + params_.b * doc_lengths_[p.doc] / avg_doc_length_;
      scores[p.doc] += w * tf * (params_.k1 + 1.0) / (tf + params_.k1 * norm);
    }
  }

  std::vector<std::pair<std::uint32_t, double>> ranked;
  ranked.reserve(scores.size());
  for (const auto& [doc, s] : scores) {
    if (s > 0.0) ranked.emplace_back(doc, s);
  }
  // Doc numbers follow ascending listing id, so the id tie-break is a doc-number tie-break.
  auto better = [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; };
  const std::size_t keep = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), better);

  result.results.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) result.results.push_back({doc_keys_[ranked[i].first], ranked[i].second});
  return result;
}

std::vector<std::pair<std::string, std::string>> read_corpus(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw std::runtime_error("corpus line " + std::to_string(line_no) + ": expected listing_id<TAB>title");
    }
    docs.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return docs;
}

}  // namespace xwalk
