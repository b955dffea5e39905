#ifndef LSIC_MIXTURE_HPP_
#define LSIC_MIXTURE_HPP_

#include "lsic/lstm.hpp"
#include "lsic/mf.hpp"

#include <map>
#include <string>

namespace lsic {

// The four factor/state mixing strategies:
//   V1 hard sum, V2 factor-initialized states, V3 static factor context,
//   V4 attention context recomputed from h_{t-1} at every step.
enum class MixtureVariant { kV1 = 1, kV2 = 2, kV3 = 3, kV4 = 4 };
MixtureVariant mixture_from_string(const std::string& s);
const char* to_string(MixtureVariant v);

struct ScorerConfig {
  MixtureVariant variant = MixtureVariant::kV4;
  int factor_dim = 5;
  int hidden = 10;
  int input_dim = 15;
  int attn_hidden = 8;
  int content_dim = 0;  // 0 disables the content path entirely
  bool v2_identity_map = false;
  int attention_pool_users = 0;   // 0 = full pool
  int attention_pool_movies = 0;  // 0 = full pool
  bool train_factors = false;
  real init_range = real(0.05);
  std::uint64_t pool_seed = 9001;

  bool has_context() const {
    return variant == MixtureVariant::kV3 || variant == MixtureVariant::kV4;
  }
  void validate() const;
};

// One player's full scoring model: factor copies, biases, two session LSTMs
// with their input embedders, the content projection and (V4) the attention
// scorers. Produces r_{u,m,t} = sigmoid(e_u.e_m + h_u(t).h_m(t) + b_u + b_m)
// and exact reverse-mode gradients for every trainable piece.
class ScorerModel {
 public:
  ScorerModel(const ScorerConfig& cfg, int num_users, int num_movies,
              Rng& init_rng);

  void attach_data(const SessionizedDataset* sd, const ContentFeatures* cf);
  void set_factors(const FactorStore& fs);  // copies factors and biases in

  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }
  const ScorerConfig& config() const { return cfg_; }
  int num_users() const { return num_users_; }
  int num_movies() const { return num_movies_; }
  int max_session() const;

  // Invalidate cached trajectories after a parameter update. heavy=true
  // retains everything backward needs.
  void begin_pass(bool heavy);
  void set_content_enabled(bool enabled);  // evaluation-time ablation switch
  bool content_enabled() const { return content_enabled_; }

  real score_s(int user, int movie, int t);  // pre-sigmoid mixing score
  real score(int user, int movie, int t) { return logistic(score_s(user, movie, t)); }

  struct ScoreGrad {
    int user, movie, t;
    real d_s;  // upstream dL/ds
  };
  // Accumulates parameter gradients for a batch of score requests (requires a
  // heavy pass; trajectories already used for scoring are reused).
  void backward(const std::vector<ScoreGrad>& upstream);

  // LSIC-V2: initial hidden state from the long-term factor.
  Vec v2_initial_state(bool movie_side, int id) const;

  // LSIC-V4 attention over the long-term factor pool.
  struct AttentionOut {
    Vec weights;  // softmax over the pool, sums to 1
    Vec context;  // sum_k weight_k * e_k
    const std::vector<int>* pool;
  };
  AttentionOut attention_context(bool movie_side, const Vec& h_prev);

  const Trajectory& user_trajectory(int user);
  const Trajectory& movie_trajectory(int movie);

  const std::vector<int>& user_pool() const { return pool_users_; }
  const std::vector<int>& movie_pool() const { return pool_movies_; }

 private:
  struct TrajEntry {
    Trajectory traj;
    std::vector<Vec> attn_weights;  // per step, V4 only
    std::vector<Vec> dh;            // upstream dL/dh per step
    bool has_grad = false;
  };

  struct Side {
    LstmCell cell;
    InputEmbedder embedder;
    ParamTensor* init_W = nullptr;   // V2
    ParamTensor* init_b = nullptr;   // V2
    ParamTensor* attn_W1 = nullptr;  // V4: attn_hidden x (hidden + factor_dim)
    ParamTensor* attn_b1 = nullptr;
    ParamTensor* attn_w2 = nullptr;
    ParamTensor* attn_b2 = nullptr;
    Mat pool_proj;  // attn_hidden x pool, refreshed in begin_pass
  };

  TrajEntry& ensure_entity(bool movie_side, int id);
  void encode_entity(bool movie_side, int id, TrajEntry& entry);
  void refresh_pool_proj(Side& side, const ParamTensor& factors,
                         const std::vector<int>& pool);
  Vec attention_forward(bool movie_side, const Vec& h_prev, Vec* weights_out);
  void attention_backward(bool movie_side, const Vec& h_prev,
                          const Vec& weights, const Vec& dctx, Vec& dh_prev);
  void backward_entity(bool movie_side, int id, TrajEntry& entry);

  ScorerConfig cfg_;
  int num_users_, num_movies_;
  ParamSet params_;
  ParamTensor* eu_;
  ParamTensor* em_;
  ParamTensor* bu_;
  ParamTensor* bm_;
  ParamTensor* content_proj_ = nullptr;
  Side user_side_, movie_side_;
  std::vector<int> pool_users_, pool_movies_;

  const SessionizedDataset* data_ = nullptr;
  const ContentFeatures* content_ = nullptr;
  bool content_enabled_ = true;
  bool heavy_ = false;
  std::map<int, TrajEntry> user_traj_, movie_traj_;
};

}  // namespace lsic

#endif  // LSIC_MIXTURE_HPP_
