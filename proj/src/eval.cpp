#include "lsic/eval.hpp"

#include <algorithm>

namespace lsic {

RankingContext build_ranking_context(const std::vector<RatingEvent>& heldout,
                                     const TrainIndex& ix, int num_users) {
  RankingContext ctx;
  ctx.positives_by_user.resize(num_users);
  for (const auto& e : heldout) {
    if (!e.positive) continue;
    if (ix.user_has_rated(e.user, e.movie)) continue;
    ctx.positives_by_user[e.user].push_back(e.movie);
  }
  for (int u = 0; u < num_users; ++u) {
    auto& v = ctx.positives_by_user[u];
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (!v.empty()) ctx.users.push_back(u);
  }
  return ctx;
}

RankedList rank_candidates(int user, std::vector<int> candidates,
                           const ScoreFn& score,
                           const std::vector<int>& positives,
                           int total_relevant) {
  std::vector<std::pair<real, int>> scored;
  scored.reserve(candidates.size());
  for (int m : candidates) scored.emplace_back(score(user, m), m);
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) {
                     if (a.first != b.first) return a.first > b.first;
                     return a.second < b.second;
                   });
  RankedList list;
  list.user = user;
  list.total_relevant = total_relevant;
  list.movies.reserve(scored.size());
  list.relevant.reserve(scored.size());
  for (const auto& [s, m] : scored) {
    (void)s;
    list.movies.push_back(m);
    list.relevant.push_back(
        std::binary_search(positives.begin(), positives.end(), m) ? 1 : 0);
  }
  return list;
}

std::vector<int> unrated_universe(const TrainIndex& ix, int user,
                                  int num_movies) {
  std::vector<int> out;
  out.reserve(num_movies);
  const auto& rated = ix.user_rated[user];
  for (int m = 0; m < num_movies; ++m)
    if (!std::binary_search(rated.begin(), rated.end(), m)) out.push_back(m);
  return out;
}

RankedList rerank_pipeline(const FactorStore& fs, const TrainIndex& ix,
                           int user, int candidate_n, const ScoreFn& score,
                           const std::vector<int>& positives) {
  CandidateList cands =
      mf_top_candidates(fs, user, ix.user_rated[user], candidate_n);
  return rank_candidates(user, std::move(cands.movies), score, positives,
                         static_cast<int>(positives.size()));
}

namespace {
MetricReport evaluate_impl(const RankingContext& ctx, const TrainIndex& ix,
                           int num_movies, const FactorStore& fs,
                           const ScoreFn& score, const EvalOptions& opt) {
  MetricReport report;
  report.label = opt.label;
  report.config_hash = opt.config_hash;
  for (int u : ctx.users) {
    const auto& positives = ctx.positives_by_user[u];
    std::vector<int> candidates;
    if (opt.rerank && opt.candidate_n > 0) {
      candidates = mf_top_candidates(fs, u, ix.user_rated[u], opt.candidate_n)
                       .movies;
    } else {
      candidates = unrated_universe(ix, u, num_movies);
    }
    RankedList list = rank_candidates(u, std::move(candidates), score,
                                      positives,
                                      static_cast<int>(positives.size()));
    report.add(list);
  }
  report.finalize();
  return report;
}
}  // namespace

MetricReport evaluate_ranking(const RankingContext& ctx, const TrainIndex& ix,
                              int num_movies, const FactorStore& fs,
                              const ScoreFn& score, const EvalOptions& opt) {
  return evaluate_impl(ctx, ix, num_movies, fs, score, opt);
}

MetricReport evaluate_mf_baseline(const RankingContext& ctx,
                                  const TrainIndex& ix, int num_movies,
                                  const FactorStore& fs,
                                  const EvalOptions& opt) {
  ScoreFn mf_score = [&fs](int u, int m) { return mf_predict(fs, u, m); };
  return evaluate_impl(ctx, ix, num_movies, fs, mf_score, opt);
}

MetricReport evaluate_scorer(const RankingContext& ctx, const TrainIndex& ix,
                             ScorerModel& scorer, const FactorStore& fs,
                             int t_eval, const EvalOptions& opt) {
  ScoreFn score = [&scorer, t_eval](int u, int m) {
    return scorer.score_s(u, m, t_eval);
  };
  return evaluate_impl(ctx, ix, scorer.num_movies(), fs, score, opt);
}

}  // namespace lsic
