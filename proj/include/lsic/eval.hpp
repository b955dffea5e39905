#ifndef LSIC_EVAL_HPP_
#define LSIC_EVAL_HPP_

#include "lsic/metrics.hpp"
#include "lsic/mixture.hpp"

#include <functional>

namespace lsic {

using ScoreFn = std::function<real(int user, int movie)>;

// Held-out positives per user, deduplicated and with the user's
// training-observed movies excluded. `users` lists users with at least one
// surviving positive, ascending.
struct RankingContext {
  std::vector<std::vector<int>> positives_by_user;
  std::vector<int> users;
};

RankingContext build_ranking_context(const std::vector<RatingEvent>& heldout,
                                     const TrainIndex& ix, int num_users);

// Sorts `candidates` by score descending (ties by ascending movie id) and
// attaches relevance labels from `positives` (sorted). `total_relevant`
// counts all of the user's reachable positives, in-list or not.
RankedList rank_candidates(int user, std::vector<int> candidates,
                           const ScoreFn& score,
                           const std::vector<int>& positives,
                           int total_relevant);

// Every movie the user has not rated in training.
std::vector<int> unrated_universe(const TrainIndex& ix, int user,
                                  int num_movies);

// MF candidate generation followed by re-ranking with `score`.
RankedList rerank_pipeline(const FactorStore& fs, const TrainIndex& ix,
                           int user, int candidate_n, const ScoreFn& score,
                           const std::vector<int>& positives);

struct EvalOptions {
  int candidate_n = 100;  // <= 0 means full unrated catalog
  bool rerank = true;
  std::string label;
  std::string config_hash;
};

// Shared protocol: one ranked list per context user, metrics averaged over
// users with at least one held-out positive.
MetricReport evaluate_ranking(const RankingContext& ctx, const TrainIndex& ix,
                              int num_movies, const FactorStore& fs,
                              const ScoreFn& score, const EvalOptions& opt);

// MF-only baseline (candidate order itself) under the identical protocol.
MetricReport evaluate_mf_baseline(const RankingContext& ctx,
                                  const TrainIndex& ix, int num_movies,
                                  const FactorStore& fs,
                                  const EvalOptions& opt);

// Mixture scorer at a fixed session index (a light pass must be active).
MetricReport evaluate_scorer(const RankingContext& ctx, const TrainIndex& ix,
                             ScorerModel& scorer, const FactorStore& fs,
                             int t_eval, const EvalOptions& opt);

}  // namespace lsic

#endif  // LSIC_EVAL_HPP_
