#ifndef LSIC_ADVERSARIAL_HPP_
#define LSIC_ADVERSARIAL_HPP_

#include "lsic/mixture.hpp"

#include <functional>
#include <optional>

namespace lsic {

// --- pure pieces, unit-testable in isolation ---

// max{0, margin - g_pos + g_neg}; zero iff the positive wins by the margin.
real d_hinge(real g_pos, real g_neg, real margin);

// Compresses a hinge value into (0,1): clip(hinge / margin, 0, 1). Values
// near 1 mean the second movie is indistinguishable from (or beats) the
// positive.
real compress_hinge(real hinge, real margin);

// Generator reward: log of the compressed discriminator output, floored so it
// never reaches -inf.
real reward_value(real compressed, real floor_delta);

// (r - mean) / std with a population std floored at 1e-8; singleton -> {0}.
std::vector<real> normalize_rewards(const std::vector<real>& rewards);

Vec softmax(const Vec& scores);

struct DrawResult {
  std::vector<int> indices;     // positions into the candidate vector
  std::vector<real> log_probs;  // log G(m_k)
};
// K independent draws with replacement from softmax(scores).
DrawResult sample_from_scores(const Vec& scores, int k, Rng& rng);

// Ascent coefficients of the REINFORCE estimator on the candidate
// pre-activations: a_c = (1/K) * (sum of rewards drawn at c - sum(rewards) * p_c).
// The estimator equals sum_c a_c * grad(s_c).
std::vector<real> reinforce_coefficients(const Vec& probs,
                                         const std::vector<int>& draws,
                                         const std::vector<real>& rewards);

// Uniform pick from the user's observed train negatives; falls back to a
// uniform unrated movie when the user has none.
int sample_negative_movie(const TrainIndex& ix, int user, int num_movies,
                          Rng& rng);

// --- pairwise pretraining (both players, before the adversarial phase) ---

struct PretrainConfig {
  int epochs = 4;
  int steps_per_epoch = 48;
  int batch = 128;
  real learning_rate = real(1e-3);
  real clip = real(0.2);
  real l2 = real(0.05);
  real margin = real(0.2);
};

// Margin-ranking pretraining on (user, positive, negative) triples sampled
// from the train index. Returns the per-epoch mean hinge loss.
std::vector<real> pretrain_pairwise(ScorerModel& model, const TrainIndex& ix,
                                    const PretrainConfig& cfg, Rng& rng);

// --- the alternating adversarial loop ---

struct AdvConfig {
  real margin = real(0.2);
  int num_samples = 64;  // K
  int batch = 128;
  real g_lr = real(1e-4);
  real d_lr = real(1e-4);
  real clip = real(0.2);
  real l2 = real(0.05);
  int g_steps = 4;
  int d_steps = 4;
  real reward_floor = real(1e-8);
  // Smoothing inside the discriminator's log objective (keeps the gradient of
  // log(1 - compressed + eps) bounded at the clip edge).
  real d_log_epsilon = real(0.1);
  int candidate_n = 100;
  bool rerank = true;  // candidates = MF top-N; otherwise full unrated catalog
  int validation_user_cap = 256;
};

struct CurvePoint {
  int epoch = 0;
  double precision_at_5 = 0;
  double ndcg_at_5 = 0;
  double mean_reward = 0;
  double d_loss = 0;
  double d_pair_acc = 0;
};

std::string curve_to_csv(const std::vector<CurvePoint>& curve,
                         const std::string& config_hash);
std::vector<CurvePoint> curve_from_csv(const std::string& body);

struct TrainerState {
  int epoch = 0;  // completed epochs
  int best_epoch = -1;
  double best_ndcg = -1;
  std::vector<CurvePoint> curve;
};

class AdversarialTrainer {
 public:
  AdversarialTrainer(ScorerModel& generator, ScorerModel& discriminator,
                     const SessionizedDataset& sd, const TrainIndex& ix,
                     const std::vector<RatingEvent>& validation,
                     const FactorStore& candidate_factors, const AdvConfig& cfg,
                     std::uint64_t seed);

  // is_best marks a new best validation NDCG@5 for the generator.
  using EpochCallback =
      std::function<void(const TrainerState& st, bool is_best)>;

  // Runs `epochs` additional epochs; 0 leaves both models untouched.
  void run(int epochs, const EpochCallback& cb = nullptr);

  TrainerState& state() { return state_; }
  const TrainerState& state() const { return state_; }
  Rng& rng() { return rng_; }

  // Resume support: restores the trainer bookkeeping and RNG stream saved in
  // a checkpoint (model tensors are restored separately).
  void restore_state(const TrainerState& st, const std::string& rng_state);

  const std::vector<int>& candidates_for(int user) const {
    return candidates_[user];
  }

  // log D~(u, m_k, m_plus | t) with the frozen discriminator.
  real reward(int user, int movie_k, int movie_pos, int t);

  // One generator policy-gradient step / one discriminator step over a
  // sampled mini-batch. Exposed for the verification suites.
  struct GStepInfo {
    double mean_raw_reward = 0;
    int contexts = 0;
  };
  GStepInfo g_step();
  double d_step();  // returns the mean pair loss

  DrawResult g_sample(int user, int t, int k);

  CurvePoint validate(int epoch_index);

 private:
  void ensure_light(ScorerModel& m, bool& heavy_flag);

  ScorerModel& gen_;
  ScorerModel& disc_;
  const SessionizedDataset& sd_;
  const TrainIndex& ix_;
  const AdvConfig cfg_;
  Rng rng_;
  TrainerState state_;
  std::vector<std::vector<int>> candidates_;
  std::vector<std::vector<int>> val_positives_;  // dedup, train-excluded
  std::vector<int> val_users_;                   // capped, ascending
  OptimizerConfig g_opt_, d_opt_;
};

}  // namespace lsic

#endif  // LSIC_ADVERSARIAL_HPP_
