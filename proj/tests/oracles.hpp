#ifndef LSIC_TESTS_ORACLES_HPP_
#define LSIC_TESTS_ORACLES_HPP_

// Brute-force definitional implementations used as independent references by
// the unit and acceptance suites. These deliberately avoid the library's
// closed forms: NDCG's ideal is found by trying every permutation, average
// precision recounts hits from scratch at every rank.

#include "lsic/metrics.hpp"

#include <algorithm>
#include <vector>

namespace lsic_oracle {

inline double precision_at(const std::vector<int>& rel, int n) {
  int hits = 0;
  for (int r = 0; r < n && r < static_cast<int>(rel.size()); ++r)
    if (rel[r]) ++hits;
  return static_cast<double>(hits) / n;
}

inline double dcg_at(const std::vector<int>& rel, int n) {
  double dcg = 0;
  for (int r = 0; r < n && r < static_cast<int>(rel.size()); ++r)
    if (rel[r]) dcg += 1.0 / std::log2(r + 2.0);
  return dcg;
}

// Ideal DCG by exhaustive permutation of the label multiset, padded with the
// unretrieved relevant items (they could have been ranked first).
inline double ndcg_at(const std::vector<int>& rel, int n, int total_relevant) {
  if (total_relevant == 0) return 0.0;
  std::vector<int> ideal(rel.size(), 0);
  int in_list = 0;
  for (int r : rel) in_list += r;
  for (int i = 0; i < total_relevant - in_list; ++i) ideal.push_back(1);
  for (int r : rel)
    if (r) ideal.push_back(1);
  for (std::size_t i = ideal.size(); i < rel.size(); ++i) ideal.push_back(0);
  std::sort(ideal.begin(), ideal.end());
  double best = 0;
  do {
    best = std::max(best, dcg_at(ideal, n));
  } while (std::next_permutation(ideal.begin(), ideal.end()));
  return dcg_at(rel, n) / best;
}

inline double reciprocal_rank(const std::vector<int>& rel) {
  for (std::size_t r = 0; r < rel.size(); ++r)
    if (rel[r]) return 1.0 / (r + 1);
  return 0.0;
}

inline double average_precision(const std::vector<int>& rel, int total_relevant) {
  if (total_relevant == 0) return 0.0;
  double sum = 0;
  for (std::size_t r = 0; r < rel.size(); ++r) {
    if (!rel[r]) continue;
    int hits = 0;
    for (std::size_t q = 0; q <= r; ++q)
      if (rel[q]) ++hits;
    sum += static_cast<double>(hits) / (r + 1);
  }
  return sum / total_relevant;
}

inline lsic::RankedList as_list(const std::vector<int>& rel) {
  lsic::RankedList list;
  list.user = 0;
  for (std::size_t i = 0; i < rel.size(); ++i) {
    list.movies.push_back(static_cast<int>(i));
    list.relevant.push_back(rel[i] ? 1 : 0);
  }
  return list;
}

}  // namespace lsic_oracle

#endif  // LSIC_TESTS_ORACLES_HPP_
