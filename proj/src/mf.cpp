#include "lsic/mf.hpp"

#include <algorithm>
#include <numeric>

namespace lsic {

real mf_predict(const FactorStore& fs, int user, int movie) {
  if (user < 0 || user >= fs.num_users())
    throw std::out_of_range("mf_predict: user index out of range");
  if (movie < 0 || movie >= fs.num_movies())
    throw std::out_of_range("mf_predict: movie index out of range");
  return logistic(fs.user_factors.row(user).dot(fs.movie_factors.row(movie)));
}

real mf_loss_and_grad(const std::vector<RatingEvent>& events, ParamTensor& eu,
                      ParamTensor& em, real l2_lambda, bool with_grads) {
  auto U = eu.mat();
  auto M = em.mat();
  real loss = 0;
  for (const auto& e : events) {
    const real s = U.row(e.user).dot(M.row(e.movie));
    const real p = logistic(s);
    const real err = MfTrainConfig::target_of(e.rating) - p;
    loss += err * err;
    if (with_grads) {
      const real ds = -2 * err * p * (1 - p);
      eu.grad_row(e.user) += ds * M.row(e.movie);
      em.grad_row(e.movie) += ds * U.row(e.user);
    }
  }
  loss += real(0.5) * l2_lambda *
          (eu.values.square().sum() + em.values.square().sum());
  if (with_grads) {
    eu.grad += l2_lambda * eu.values;
    em.grad += l2_lambda * em.values;
  }
  return loss;
}

FactorStore mf_train(const std::vector<RatingEvent>& train, int num_users,
                     int num_movies, const MfTrainConfig& cfg, Rng& rng,
                     std::vector<MfEpochLog>* log) {
  if (cfg.dim < 1) throw ConfigError("mf: factor dimension must be >= 1");

  ParamSet params;
  ParamTensor* eu = params.add("user_factors", {num_users, cfg.dim});
  ParamTensor* em = params.add("movie_factors", {num_movies, cfg.dim});
  fill_uniform(*eu, -cfg.init_range, cfg.init_range, rng);
  fill_uniform(*em, -cfg.init_range, cfg.init_range, rng);

  OptimizerConfig opt;
  opt.learning_rate = cfg.learning_rate;
  opt.clip_range = cfg.clip_range;
  opt.l2_lambda = cfg.l2_lambda;

  auto objective = [&]() {
    return mf_loss_and_grad(train, *eu, *em, cfg.l2_lambda, false);
  };
  const real initial = objective();

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t(0));

  auto Umat = eu->mat();
  auto Mmat = em->mat();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    std::size_t pos = 0;
    while (pos < order.size()) {
      const std::size_t end = std::min(pos + cfg.batch_size, order.size());
      const real inv = real(1) / real(end - pos);
      for (std::size_t k = pos; k < end; ++k) {
        const auto& e = train[order[k]];
        const real p = logistic(Umat.row(e.user).dot(Mmat.row(e.movie)));
        const real err = MfTrainConfig::target_of(e.rating) - p;
        const real ds = -2 * err * p * (1 - p) * inv;
        eu->grad_row(e.user) += ds * Mmat.row(e.movie);
        em->grad_row(e.movie) += ds * Umat.row(e.user);
      }
      sgd_step(params, opt);
      pos = end;
    }
    const real obj = objective();
    if (log) log->push_back({epoch, obj});
    if (!(obj <= 10 * std::max(initial, real(1e-12))))
      throw TrainingError("mf_train diverged at epoch " +
                          std::to_string(epoch) + ": objective " +
                          std::to_string(obj) + " vs initial " +
                          std::to_string(initial));
  }

  FactorStore fs;
  fs.user_factors = eu->mat();
  fs.movie_factors = em->mat();
  fs.user_bias = Vec::Zero(num_users);
  fs.movie_bias = Vec::Zero(num_movies);
  return fs;
}

CandidateList mf_top_candidates(const FactorStore& fs, int user,
                                const std::vector<int>& exclude, int n) {
  if (n < 1) throw std::invalid_argument("mf_top_candidates: n must be >= 1");
  const int M = fs.num_movies();
  // Scores are monotone in the dot product; sorting by the dot product keeps
  // the logistic out of the hot loop.
  Vec scores = fs.movie_factors * fs.user_factors.row(user).transpose();

  CandidateList out;
  out.movies.reserve(std::min(n, M));
  std::vector<int> ids;
  ids.reserve(M);
  for (int j = 0; j < M; ++j)
    if (!std::binary_search(exclude.begin(), exclude.end(), j))
      ids.push_back(j);
  const int take = std::min<int>(n, static_cast<int>(ids.size()));
  std::partial_sort(ids.begin(), ids.begin() + take, ids.end(),
                    [&](int a, int b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  ids.resize(take);
  out.movies = std::move(ids);
  out.truncated = take < n;
  return out;
}

}  // namespace lsic
