#include "lsic/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace lsic {

real precision_at_n(const RankedList& list, int n) {
  if (n < 1) throw std::invalid_argument("precision_at_n: n must be >= 1");
  int hits = 0;
  const int top = std::min<int>(n, static_cast<int>(list.relevant.size()));
  for (int r = 0; r < top; ++r) hits += list.relevant[r];
  return real(hits) / real(n);
}

real ndcg_at_n(const RankedList& list, int n) {
  if (n < 1) throw std::invalid_argument("ndcg_at_n: n must be >= 1");
  const int total = list.relevant_total();
  if (total == 0) return 0;
  real dcg = 0;
  const int top = std::min<int>(n, static_cast<int>(list.relevant.size()));
  for (int r = 0; r < top; ++r)
    if (list.relevant[r]) dcg += real(1) / std::log2(real(r + 2));
  real ideal = 0;
  for (int r = 0; r < std::min(n, total); ++r)
    ideal += real(1) / std::log2(real(r + 2));
  return dcg / ideal;
}

real reciprocal_rank(const RankedList& list) {
  for (std::size_t r = 0; r < list.relevant.size(); ++r)
    if (list.relevant[r]) return real(1) / real(r + 1);
  return 0;
}

real average_precision(const RankedList& list) {
  const int total = list.relevant_total();
  if (total == 0) return 0;
  real sum = 0;
  int hits = 0;
  for (std::size_t r = 0; r < list.relevant.size(); ++r) {
    if (list.relevant[r]) {
      ++hits;
      sum += real(hits) / real(r + 1);
    }
  }
  return sum / real(total);
}

void MetricReport::add(const RankedList& list) {
  PerUser u;
  u.user = list.user;
  u.p3 = precision_at_n(list, 3);
  u.p5 = precision_at_n(list, 5);
  u.p10 = precision_at_n(list, 10);
  u.n3 = ndcg_at_n(list, 3);
  u.n5 = ndcg_at_n(list, 5);
  u.n10 = ndcg_at_n(list, 10);
  u.rr = reciprocal_rank(list);
  u.ap = average_precision(list);
  users.push_back(u);
}

void MetricReport::finalize() {
  user_count = static_cast<int>(users.size());
  precision3 = precision5 = precision10 = 0;
  ndcg3 = ndcg5 = ndcg10 = 0;
  mrr = map = 0;
  if (user_count == 0) return;
  for (const auto& u : users) {
    precision3 += u.p3;
    precision5 += u.p5;
    precision10 += u.p10;
    ndcg3 += u.n3;
    ndcg5 += u.n5;
    ndcg10 += u.n10;
    mrr += u.rr;
    map += u.ap;
  }
  const real inv = real(1) / real(user_count);
  precision3 *= inv;
  precision5 *= inv;
  precision10 *= inv;
  ndcg3 *= inv;
  ndcg5 *= inv;
  ndcg10 *= inv;
  mrr *= inv;
  map *= inv;
}

std::string MetricReport::to_csv() const {
  std::ostringstream os;
  os << "# config_hash=" << config_hash << "\n";
  os << "# label=" << label << "\n";
  os << "user,precision_at_3,precision_at_5,precision_at_10,"
        "ndcg_at_3,ndcg_at_5,ndcg_at_10,mrr,map\n";
  char buf[320];
  for (const auto& u : users) {
    std::snprintf(buf, sizeof(buf),
                  "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  u.user, double(u.p3), double(u.p5), double(u.p10),
                  double(u.n3), double(u.n5), double(u.n10), double(u.rr),
                  double(u.ap));
    os << buf;
  }
  std::snprintf(buf, sizeof(buf),
                "mean,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                double(precision3), double(precision5), double(precision10),
                double(ndcg3), double(ndcg5), double(ndcg10), double(mrr),
                double(map));
  os << buf;
  return os.str();
}

std::string MetricReport::to_table() const {
  char buf[640];
  std::snprintf(buf, sizeof(buf),
                "%s (%d users)\n"
                "  Precision@3  %.4f   Precision@5  %.4f   Precision@10 %.4f\n"
                "  NDCG@3       %.4f   NDCG@5       %.4f   NDCG@10      %.4f\n"
                "  MRR          %.4f   MAP          %.4f\n",
                label.c_str(), user_count, double(precision3),
                double(precision5), double(precision10), double(ndcg3),
                double(ndcg5), double(ndcg10), double(mrr), double(map));
  return buf;
}

}  // namespace lsic
