#ifndef LSIC_MF_HPP_
#define LSIC_MF_HPP_

#include "lsic/data.hpp"
#include "lsic/optimizer.hpp"
#include "lsic/rng.hpp"

#include <vector>

namespace lsic {

// Long-term latent profiles. Biases are stored here but only enter scoring
// through the mixture; factor training itself is bias-free.
struct FactorStore {
  RowMat user_factors;   // U x d
  RowMat movie_factors;  // M x d
  Vec user_bias;         // U
  Vec movie_bias;        // M

  int dim() const { return static_cast<int>(user_factors.cols()); }
  int num_users() const { return static_cast<int>(user_factors.rows()); }
  int num_movies() const { return static_cast<int>(movie_factors.rows()); }
};

// logistic(e_u . e_m), strictly inside (0,1) for finite factors.
real mf_predict(const FactorStore& fs, int user, int movie);

struct MfTrainConfig {
  int dim = 5;
  real learning_rate = real(0.01);
  real l2_lambda = real(0.05);
  real clip_range = real(0.2);
  int epochs = 200;
  int batch_size = 256;
  real init_range = real(0.05);
  // Star ratings are rescaled to (r - 0.5) / 5 so the logistic output can
  // reach them; ranking is unaffected.
  static real target_of(real rating) { return (rating - real(0.5)) / real(5); }
};

struct MfEpochLog {
  int epoch;
  real objective;  // squared error + (lambda/2)(|Eu|^2 + |Em|^2)
};

// SGD on the regularized squared loss over observed entries, shuffled each
// epoch. Aborts with a diagnostic if the objective exceeds 10x its initial
// value.
FactorStore mf_train(const std::vector<RatingEvent>& train, int num_users,
                     int num_movies, const MfTrainConfig& cfg, Rng& rng,
                     std::vector<MfEpochLog>* log = nullptr);

// Squared-error + L2 objective and analytic gradients for verification;
// grads accumulate into the two tensors ("user_factors", "movie_factors").
real mf_loss_and_grad(const std::vector<RatingEvent>& events, ParamTensor& eu,
                      ParamTensor& em, real l2_lambda, bool with_grads);

struct CandidateList {
  std::vector<int> movies;  // descending score, ties by ascending id
  bool truncated = false;   // fewer than n movies were available
};

// Top-n means by mf_predict, excluding `exclude` (sorted ascending).
CandidateList mf_top_candidates(const FactorStore& fs, int user,
                                const std::vector<int>& exclude, int n);

}  // namespace lsic

#endif  // LSIC_MF_HPP_
