#ifndef LSIC_METRICS_HPP_
#define LSIC_METRICS_HPP_

#include "lsic/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lsic {

// One user's ranked recommendation list with binary relevance labels.
// `total_relevant` counts every held-out positive reachable by the protocol,
// including ones a truncated candidate list failed to retrieve; it defaults
// to the in-list count.
struct RankedList {
  int user = -1;
  std::vector<int> movies;             // descending score
  std::vector<std::uint8_t> relevant;  // parallel to movies
  int total_relevant = -1;

  int relevant_total() const {
    if (total_relevant >= 0) return total_relevant;
    int c = 0;
    for (auto r : relevant) c += r;
    return c;
  }
};

real precision_at_n(const RankedList& list, int n);
// Binary-gain DCG@n with gain 1/log2(rank+1), normalized by the ideal DCG of
// `relevant_total()` items; 0 when the user has no relevant items.
real ndcg_at_n(const RankedList& list, int n);
// 1/rank of the first relevant item; 0 if none.
real reciprocal_rank(const RankedList& list);
// Sum of precision@rank over relevant in-list items, divided by
// relevant_total(); 0 if none.
real average_precision(const RankedList& list);

struct MetricReport {
  struct PerUser {
    int user;
    real p3, p5, p10;
    real n3, n5, n10;
    real rr, ap;
  };
  std::vector<PerUser> users;
  real precision3 = 0, precision5 = 0, precision10 = 0;
  real ndcg3 = 0, ndcg5 = 0, ndcg10 = 0;
  real mrr = 0, map = 0;
  int user_count = 0;
  std::string config_hash;
  std::string label;

  void add(const RankedList& list);
  void finalize();  // arithmetic means over added users

  std::string to_csv() const;    // header comment carries the config hash
  std::string to_table() const;  // human-readable summary
};

}  // namespace lsic

#endif  // LSIC_METRICS_HPP_
