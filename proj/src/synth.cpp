#include "xwalk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace xwalk {

void SyntheticLogSpec::check() const {
  if (num_queries == 0 || num_listings == 0 || num_shops == 0 || tag_vocab_size == 0 || cluster_count == 0 ||
      events == 0 || eval_queries == 0 || active_listings_per_cluster == 0 || preferred_per_query == 0) {
    throw std::invalid_argument("synthetic log counts must be positive");
  }
  if (!(zipf_exponent > 0.0)) throw std::invalid_argument("zipf exponent must be positive");
  if (cluster_count > num_queries) throw std::invalid_argument("more clusters than queries");
  if (cluster_count > num_listings || cluster_count > num_shops || cluster_count > tag_vocab_size) {
    throw std::invalid_argument("every cluster needs at least one listing, shop and tag");
  }
  auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!(lexical_bias >= 0.0)) throw std::invalid_argument("lexical bias must be non-negative");
  if (!unit(novel_query_fraction) || !unit(in_cluster_fraction) || !unit(fresh_relevant_fraction)) {
    throw std::invalid_argument("fractions must lie in [0, 1]");
  }
}

namespace {

constexpr std::size_t kClusterWords = 8;
constexpr std::size_t kCategoryWords = 4;
constexpr std::size_t kCategories = 5;
constexpr std::size_t kNoiseWords = 200;
constexpr double kPreferredShare = 0.9;  // events hitting the query's preferred listings

std::string pseudo_word(std::size_t index) {
  static constexpr const char* kSyllables[] = {"ka", "lo", "mi", "ra", "te", "su", "vo", "ne", "pa", "di",
                                               "bu", "ge", "ho", "ji", "fa", "ze", "wu", "ci", "ro", "ya"};
  constexpr std::size_t n = std::size(kSyllables);
  std::string w;
  // Three syllables cover 8000 words; beyond that the word just gets longer.
  std::size_t x = index;
  for (int i = 0; i < 3 || x > 0; ++i) {
    w += kSyllables[x % n];
    x /= n;
  }
  return w;
}

std::string padded(char prefix, std::size_t value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%0*zu", prefix, width, value);
  return buf;
}

int digits(std::size_t n) { return static_cast<int>(std::to_string(n > 0 ? n - 1 : 0).size()); }

class Vocabulary {
 public:
  explicit Vocabulary(std::size_t clusters) : clusters_(clusters) {}

  // Word slots: noise words first, then category words, then per-cluster words,
  // then one distinguishing word per query.
  std::string noise(std::size_t i) const { return pseudo_word(i); }
  std::string cluster_word(std::size_t cluster, std::size_t i) const {
    if (i < kCategoryWords) return pseudo_word(kNoiseWords + (cluster % kCategories) * kCategoryWords + i);
    return pseudo_word(kNoiseWords + kCategories * kCategoryWords + cluster * kClusterWords + (i - kCategoryWords));
  }
  std::size_t cluster_vocab_size() const { return kCategoryWords + kClusterWords; }
  std::string query_word(std::size_t query) const {
    return pseudo_word(kNoiseWords + kCategories * kCategoryWords + clusters_ * kClusterWords + query);
  }

 private:
  std::size_t clusters_;
};

std::size_t overlap(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t n = 0;
  for (const auto& x : a) n += std::count(b.begin(), b.end(), x);
  return n;
}

/// Draws `count` distinct items with probability proportional to `weights`.
std::vector<std::size_t> weighted_distinct(const std::vector<double>& weights, std::size_t count,
                                           std::mt19937_64& rng) {
  std::vector<double> w = weights;
  std::vector<std::size_t> out;
  count = std::min(count, w.size());
  for (std::size_t k = 0; k < count; ++k) {
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    const auto i = pick(rng);
    out.push_back(i);
    w[i] = 0.0;
  }
  return out;
}

}  // namespace

SyntheticData generate_synthetic_log(const SyntheticLogSpec& spec) {
  spec.check();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t clusters = spec.cluster_count;
  const Vocabulary vocab(clusters);

  SyntheticData data;

  // Listings: cluster by id, shop and tags from the cluster's partition of each space.
  std::vector<std::vector<std::size_t>> cluster_listings(clusters);
  std::vector<std::vector<std::string>> title_words(spec.num_listings);
  std::vector<std::string> listing_ids(spec.num_listings), shop_of(spec.num_listings);
  std::vector<std::vector<std::string>> tags_of(spec.num_listings);
  data.listing_cluster.resize(spec.num_listings);
  const int listing_width = digits(spec.num_listings);
  for (std::size_t l = 0; l < spec.num_listings; ++l) {
    const std::size_t c = l % clusters;
    data.listing_cluster[l] = c;
    cluster_listings[c].push_back(l);
    listing_ids[l] = padded('l', l, listing_width);

    const std::size_t shops_in_cluster = (spec.num_shops - c + clusters - 1) / clusters;
    const std::size_t shop = c + clusters * std::uniform_int_distribution<std::size_t>(0, shops_in_cluster - 1)(rng);
    shop_of[l] = padded('s', shop, digits(spec.num_shops));

    const std::size_t tags_in_cluster = (spec.tag_vocab_size - c + clusters - 1) / clusters;
    std::uniform_int_distribution<std::size_t> tag_pick(0, tags_in_cluster - 1);
    const std::size_t tag_count = std::uniform_int_distribution<std::size_t>(2, 4)(rng);
    std::set<std::size_t> tags;
    for (std::size_t t = 0; t < tag_count; ++t) tags.insert(c + clusters * tag_pick(rng));
    for (auto t : tags) tags_of[l].push_back("t" + pseudo_word(t));

    std::uniform_int_distribution<std::size_t> word_pick(0, vocab.cluster_vocab_size() - 1);
    std::set<std::size_t> words;
    while (words.size() < 3) words.insert(word_pick(rng));
    for (auto w : words) title_words[l].push_back(vocab.cluster_word(c, w));
    std::uniform_int_distribution<std::size_t> noise_pick(0, kNoiseWords - 1);
    title_words[l].push_back(vocab.noise(noise_pick(rng)));
    title_words[l].push_back(vocab.noise(noise_pick(rng)));
    std::shuffle(title_words[l].begin(), title_words[l].end(), rng);
  }
  data.corpus.reserve(spec.num_listings);
  for (std::size_t l = 0; l < spec.num_listings; ++l) {
    std::string title;
    for (const auto& w : title_words[l]) title += (title.empty() ? "" : " ") + w;
    data.corpus.emplace_back(listing_ids[l], std::move(title));
  }

  // Active pool per cluster: the listings that receive logged interactions.
  std::vector<std::vector<std::size_t>> pool(clusters);
  std::vector<bool> in_pool(spec.num_listings, false);
  for (std::size_t c = 0; c < clusters; ++c) {
    auto members = cluster_listings[c];
    std::shuffle(members.begin(), members.end(), rng);
    members.resize(std::min(members.size(), spec.active_listings_per_cluster));
    std::sort(members.begin(), members.end());
    for (auto l : members) in_pool[l] = true;
    pool[c] = std::move(members);
  }

  // Queries in popularity-rank order.
  const std::size_t nq = spec.num_queries;
  std::vector<std::vector<std::string>> query_words(nq);
  std::vector<std::size_t> order(nq);
  for (std::size_t q = 0; q < nq; ++q) order[q] = q;
  std::shuffle(order.begin(), order.end(), rng);
  data.queries.resize(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    // Round-robin over a shuffled order so every cluster gets queries.
    const std::size_t c = order[q] % clusters;
    data.queries[q].cluster = c;
    std::uniform_int_distribution<std::size_t> word_pick(0, vocab.cluster_vocab_size() - 1);
    const auto a = word_pick(rng);
    auto b = word_pick(rng);
    while (b == a) b = word_pick(rng);
    query_words[q] = {vocab.cluster_word(c, a), vocab.cluster_word(c, b)};
    data.queries[q].text = query_words[q][0] + " " + query_words[q][1] + " " + vocab.query_word(q);
  }
  {
    const std::size_t protected_head = std::max<std::size_t>(1, nq / 10);
    std::vector<std::size_t> candidates;
    for (std::size_t q = protected_head; q < nq; ++q) candidates.push_back(q);
    std::shuffle(candidates.begin(), candidates.end(), rng);
    const auto novel = static_cast<std::size_t>(std::llround(spec.novel_query_fraction * static_cast<double>(nq)));
    for (std::size_t i = 0; i < std::min(novel, candidates.size()); ++i) data.queries[candidates[i]].novel = true;
  }

  // Preferred listings per query, biased toward lexical overlap with the query.
  std::vector<std::vector<std::size_t>> preferred(nq);
  std::vector<std::discrete_distribution<std::size_t>> preferred_pick(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    const auto& members = pool[data.queries[q].cluster];
    std::vector<double> w;
    w.reserve(members.size());
    for (auto l : members) w.push_back(1.0 + spec.lexical_bias * static_cast<double>(overlap(query_words[q], title_words[l])));
    for (auto i : weighted_distinct(w, spec.preferred_per_query, rng)) preferred[q].push_back(members[i]);
    std::vector<double> pw;
    for (std::size_t j = 0; j < preferred[q].size(); ++j) pw.push_back(1.0 / static_cast<double>(j + 1));
    preferred_pick[q] = std::discrete_distribution<std::size_t>(pw.begin(), pw.end());
  }

  std::vector<double> zipf(nq), zipf_known(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    zipf[q] = std::pow(static_cast<double>(q + 1), -spec.zipf_exponent);
    zipf_known[q] = data.queries[q].novel ? 0.0 : zipf[q];
  }
  std::discrete_distribution<std::size_t> draw_query(zipf.begin(), zipf.end());
  std::discrete_distribution<std::size_t> draw_known(zipf_known.begin(), zipf_known.end());

  std::vector<std::size_t> all_pool;
  for (const auto& p : pool) all_pool.insert(all_pool.end(), p.begin(), p.end());

  // Training log.
  std::vector<std::uint64_t> train_count(nq, 0);
  data.log.reserve(spec.events);
  data.training_ranks.reserve(spec.events);
  for (std::size_t e = 0; e < spec.events; ++e) {
    const std::size_t q = draw_known(rng);
    const std::size_t c = data.queries[q].cluster;
    std::size_t listing;
    if (unit(rng) >= spec.in_cluster_fraction) {
      // Out-of-cluster noise; redraw until the listing really is foreign.
      do {
        listing = all_pool[std::uniform_int_distribution<std::size_t>(0, all_pool.size() - 1)(rng)];
      } while (clusters > 1 && data.listing_cluster[listing] == c);
    } else if (unit(rng) < kPreferredShare) {
      listing = preferred[q][preferred_pick[q](rng)];
    } else {
      listing = pool[c][std::uniform_int_distribution<std::size_t>(0, pool[c].size() - 1)(rng)];
    }

    const double r = unit(rng);
    const Interaction kind = r < 0.035 ? Interaction::Purchase : (r < 0.097 ? Interaction::Cart : Interaction::Click);

    InteractionRecord rec;
    rec.query = data.queries[q].text;
    rec.listing_id = listing_ids[listing];
    rec.interaction = kind;
    rec.shop_id = shop_of[listing];
    rec.tags = tags_of[listing];
    rec.title = data.corpus[listing].second;
    data.log.push_back(std::move(rec));
    data.training_ranks.push_back(q);
    ++train_count[q];
  }

  // Evaluation sample: drawn from the full popularity law, duplicates kept.
  const int qid_width = digits(spec.eval_queries);
  for (std::size_t i = 0; i < spec.eval_queries; ++i) {
    const std::size_t q = draw_query(rng);
    const std::size_t c = data.queries[q].cluster;
    EvalQuery ev{padded('e', i, qid_width), data.queries[q].text, q};

    const double r = unit(rng);
    const std::size_t relevant_count = r < 0.82 ? 1 : (r < 0.94 ? 2 : 3);
    std::set<std::string> relevant;
    for (std::size_t k = 0; k < relevant_count * 4 && relevant.size() < relevant_count; ++k) {
      std::size_t listing;
      if (unit(rng) < spec.fresh_relevant_fraction) {
        std::vector<std::size_t> fresh;
        std::vector<double> w;
        for (auto l : cluster_listings[c]) {
          if (in_pool[l]) continue;
          fresh.push_back(l);
          w.push_back(1.0 + spec.lexical_bias * static_cast<double>(overlap(query_words[q], title_words[l])));
        }
        if (fresh.empty()) continue;
        listing = fresh[weighted_distinct(w, 1, rng).front()];
      } else {
        listing = preferred[q][preferred_pick[q](rng)];
      }
      relevant.insert(listing_ids[listing]);
    }
    if (relevant.empty()) relevant.insert(listing_ids[preferred[q].front()]);
    data.qrels[ev.qid] = std::move(relevant);
    data.frequencies[ev.qid] = train_count[q];
    data.eval.push_back(std::move(ev));
  }
  return data;
}

}  // namespace xwalk
