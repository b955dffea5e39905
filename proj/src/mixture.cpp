#include "lsic/mixture.hpp"

#include <algorithm>

namespace lsic {

MixtureVariant mixture_from_string(const std::string& s) {
  if (s == "v1") return MixtureVariant::kV1;
  if (s == "v2") return MixtureVariant::kV2;
  if (s == "v3") return MixtureVariant::kV3;
  if (s == "v4") return MixtureVariant::kV4;
  throw ConfigError("unknown mixture variant '" + s + "' (expected v1..v4)");
}

const char* to_string(MixtureVariant v) {
  switch (v) {
    case MixtureVariant::kV1: return "v1";
    case MixtureVariant::kV2: return "v2";
    case MixtureVariant::kV3: return "v3";
    case MixtureVariant::kV4: return "v4";
  }
  return "?";
}

void ScorerConfig::validate() const {
  if (factor_dim < 1 || hidden < 1 || input_dim < 1)
    throw ConfigError("scorer: dimensions must be >= 1");
  if (variant == MixtureVariant::kV2 && v2_identity_map && factor_dim != hidden)
    throw ConfigError("scorer: v2 identity map requires factor_dim == hidden");
  if (variant == MixtureVariant::kV4 && attn_hidden < 1)
    throw ConfigError("scorer: attention hidden width must be >= 1");
}

ScorerModel::ScorerModel(const ScorerConfig& cfg, int num_users, int num_movies,
                         Rng& init_rng)
    : cfg_(cfg), num_users_(num_users), num_movies_(num_movies) {
  cfg_.validate();
  const int d = cfg_.factor_dim;
  const int H = cfg_.hidden;

  eu_ = params_.add("factors.user", {num_users, d});
  em_ = params_.add("factors.movie", {num_movies, d});
  bu_ = params_.add("bias.user", {num_users});
  bm_ = params_.add("bias.movie", {num_movies});
  eu_->trainable = cfg_.train_factors;
  em_->trainable = cfg_.train_factors;
  fill_uniform(*eu_, -cfg_.init_range, cfg_.init_range, init_rng);
  fill_uniform(*em_, -cfg_.init_range, cfg_.init_range, init_rng);

  LstmDims dims{H, cfg_.input_dim, cfg_.has_context() ? d : 0};
  user_side_.cell = LstmCell::create(params_, "lstm.user", dims);
  movie_side_.cell = LstmCell::create(params_, "lstm.movie", dims);
  // User sessions are rating vectors over movies and vice versa.
  user_side_.embedder.table = params_.add("embed.user_input", {num_movies, cfg_.input_dim});
  user_side_.embedder.input_dim = cfg_.input_dim;
  movie_side_.embedder.table = params_.add("embed.movie_input", {num_users, cfg_.input_dim});
  movie_side_.embedder.input_dim = cfg_.input_dim;
  for (const char* name : {"lstm.user.W", "lstm.user.V", "lstm.movie.W",
                           "lstm.movie.V", "embed.user_input",
                           "embed.movie_input"})
    fill_uniform(*params_.find(name), -cfg_.init_range, cfg_.init_range,
                 init_rng);

  if (cfg_.content_dim > 0) {
    content_proj_ = params_.add("content.proj", {cfg_.input_dim, cfg_.content_dim});
    fill_uniform(*content_proj_, -cfg_.init_range, cfg_.init_range, init_rng);
  }

  if (cfg_.variant == MixtureVariant::kV2 && !cfg_.v2_identity_map) {
    // Zero-initialized: the mapped state starts at 0 like the other variants.
    user_side_.init_W = params_.add("init.user.W", {H, d});
    user_side_.init_b = params_.add("init.user.b", {H});
    movie_side_.init_W = params_.add("init.movie.W", {H, d});
    movie_side_.init_b = params_.add("init.movie.b", {H});
  }

  if (cfg_.variant == MixtureVariant::kV4) {
    const int A = cfg_.attn_hidden;
    auto make_attn = [&](Side& side, const std::string& prefix) {
      side.attn_W1 = params_.add(prefix + ".W1", {A, H + d});
      side.attn_b1 = params_.add(prefix + ".b1", {A});
      side.attn_w2 = params_.add(prefix + ".w2", {A});
      side.attn_b2 = params_.add(prefix + ".b2", {1});
      for (ParamTensor* t : {side.attn_W1, side.attn_b1, side.attn_w2, side.attn_b2})
        fill_uniform(*t, -cfg_.init_range, cfg_.init_range, init_rng);
    };
    make_attn(user_side_, "attn.user");
    make_attn(movie_side_, "attn.movie");
  }

  auto build_pool = [&](int total, int cap, std::uint64_t salt) {
    std::vector<int> pool;
    if (cap <= 0 || cap >= total) {
      pool.resize(total);
      for (int i = 0; i < total; ++i) pool[i] = i;
    } else {
      Rng pool_rng(cfg_.pool_seed ^ salt);
      pool = pool_rng.sample_without_replacement(total, cap);
    }
    return pool;
  };
  pool_users_ = build_pool(num_users_, cfg_.attention_pool_users, 0x5155u);
  pool_movies_ = build_pool(num_movies_, cfg_.attention_pool_movies, 0x4d56u);
  if (pool_users_.empty() || pool_movies_.empty())
    throw ConfigError("scorer: attention pool is empty");
}

void ScorerModel::attach_data(const SessionizedDataset* sd,
                              const ContentFeatures* cf) {
  if (sd && (sd->num_users != num_users_ || sd->num_movies != num_movies_))
    throw ConfigError("scorer: dataset U/M mismatch");
  if (cf && content_proj_ && cf->dim != cfg_.content_dim)
    throw ConfigError("scorer: content feature dimension mismatch");
  data_ = sd;
  content_ = cf;
  user_traj_.clear();
  movie_traj_.clear();
}

void ScorerModel::set_factors(const FactorStore& fs) {
  if (fs.num_users() != num_users_ || fs.num_movies() != num_movies_ ||
      fs.dim() != cfg_.factor_dim)
    throw ConfigError("scorer: factor store shape mismatch");
  eu_->mat() = fs.user_factors;
  em_->mat() = fs.movie_factors;
  bu_->vec() = fs.user_bias;
  bm_->vec() = fs.movie_bias;
}

int ScorerModel::max_session() const {
  if (!data_) throw std::logic_error("scorer: no dataset attached");
  return data_->session_count - 1;
}

void ScorerModel::refresh_pool_proj(Side& side, const ParamTensor& factors,
                                    const std::vector<int>& pool) {
  const int A = cfg_.attn_hidden;
  const int H = cfg_.hidden;
  const int d = cfg_.factor_dim;
  const auto W1e = side.attn_W1->mat().block(0, H, A, d);
  side.pool_proj.resize(A, static_cast<Eigen::Index>(pool.size()));
  for (std::size_t k = 0; k < pool.size(); ++k)
    side.pool_proj.col(static_cast<Eigen::Index>(k)) =
        W1e * factors.row(pool[k]).matrix().transpose();
  side.pool_proj.colwise() += side.attn_b1->vec();
}

void ScorerModel::begin_pass(bool heavy) {
  heavy_ = heavy;
  user_traj_.clear();
  movie_traj_.clear();
  if (cfg_.variant == MixtureVariant::kV4) {
    refresh_pool_proj(user_side_, *eu_, pool_users_);
    refresh_pool_proj(movie_side_, *em_, pool_movies_);
  }
}

void ScorerModel::set_content_enabled(bool enabled) {
  content_enabled_ = enabled;
  user_traj_.clear();
  movie_traj_.clear();
}

Vec ScorerModel::v2_initial_state(bool movie_side, int id) const {
  const ParamTensor& factors = movie_side ? *em_ : *eu_;
  const Vec e = factors.row(id).matrix().transpose();
  if (cfg_.v2_identity_map) return e;
  const Side& side = movie_side ? movie_side_ : user_side_;
  return side.init_W->mat() * e + side.init_b->vec();
}

Vec ScorerModel::attention_forward(bool movie_side, const Vec& h_prev,
                                   Vec* weights_out) {
  Side& side = movie_side ? movie_side_ : user_side_;
  const ParamTensor& factors = movie_side ? *em_ : *eu_;
  const std::vector<int>& pool = movie_side ? pool_movies_ : pool_users_;
  const int A = cfg_.attn_hidden;
  const int H = cfg_.hidden;

  const Vec hterm = side.attn_W1->mat().block(0, 0, A, H) * h_prev;
  Mat T = side.pool_proj;
  T.colwise() += hterm;
  T = T.array().tanh().matrix();
  Vec scores = T.transpose() * side.attn_w2->vec();
  scores.array() += side.attn_b2->values[0];

  const real m = scores.maxCoeff();
  Vec w = (scores.array() - m).exp().matrix();
  w /= w.sum();
  if (weights_out) *weights_out = w;

  Vec ctx = Vec::Zero(cfg_.factor_dim);
  for (std::size_t k = 0; k < pool.size(); ++k)
    ctx += w[static_cast<Eigen::Index>(k)] *
           factors.row(pool[k]).matrix().transpose();
  return ctx;
}

ScorerModel::AttentionOut ScorerModel::attention_context(bool movie_side,
                                                         const Vec& h_prev) {
  if (cfg_.variant != MixtureVariant::kV4)
    throw std::logic_error("attention_context: model is not V4");
  AttentionOut out;
  out.context = attention_forward(movie_side, h_prev, &out.weights);
  out.pool = movie_side ? &pool_movies_ : &pool_users_;
  return out;
}

void ScorerModel::attention_backward(bool movie_side, const Vec& h_prev,
                                     const Vec& weights, const Vec& dctx,
                                     Vec& dh_prev) {
  Side& side = movie_side ? movie_side_ : user_side_;
  ParamTensor& factors = movie_side ? *em_ : *eu_;
  const std::vector<int>& pool = movie_side ? pool_movies_ : pool_users_;
  const int A = cfg_.attn_hidden;
  const int H = cfg_.hidden;
  const int d = cfg_.factor_dim;
  const auto P = static_cast<Eigen::Index>(pool.size());

  // d(sum_k w_k e_k)
  Vec dalpha(P);
  for (Eigen::Index k = 0; k < P; ++k) {
    dalpha[k] = factors.row(pool[static_cast<std::size_t>(k)]).matrix() * dctx;
    if (cfg_.train_factors)
      factors.grad_row(pool[static_cast<std::size_t>(k)]) +=
          weights[k] * dctx.transpose();
  }
  // softmax backward
  const real dot = weights.dot(dalpha);
  Vec dscore = (weights.array() * (dalpha.array() - dot)).matrix();

  // Recompute the tanh activations (cheaper than caching A x P per step).
  const Vec hterm = side.attn_W1->mat().block(0, 0, A, H) * h_prev;
  Mat T = side.pool_proj;
  T.colwise() += hterm;
  T = T.array().tanh().matrix();

  side.attn_w2->grad_vec() += T * dscore;
  side.attn_b2->grad[0] += dscore.sum();
  Mat dZ = side.attn_w2->vec() * dscore.transpose();
  dZ = (dZ.array() * (1 - T.array().square())).matrix();

  const Vec rowsum = dZ.rowwise().sum();
  side.attn_b1->grad_vec() += rowsum;
  side.attn_W1->grad_mat().block(0, 0, A, H) +=
      rowsum * h_prev.transpose();
  dh_prev += side.attn_W1->mat().block(0, 0, A, H).transpose() * rowsum;

  Mat dW1e = Mat::Zero(A, d);
  for (Eigen::Index k = 0; k < P; ++k) {
    dW1e += dZ.col(k) *
            factors.row(pool[static_cast<std::size_t>(k)]).matrix();
    if (cfg_.train_factors)
      factors.grad_row(pool[static_cast<std::size_t>(k)]) +=
          (side.attn_W1->mat().block(0, H, A, d).transpose() * dZ.col(k))
              .transpose();
  }
  side.attn_W1->grad_mat().block(0, H, A, d) += dW1e;
}

ScorerModel::TrajEntry& ScorerModel::ensure_entity(bool movie_side, int id) {
  auto& cache = movie_side ? movie_traj_ : user_traj_;
  auto it = cache.find(id);
  if (it != cache.end()) return it->second;
  TrajEntry& entry = cache[id];
  encode_entity(movie_side, id, entry);
  return entry;
}

void ScorerModel::encode_entity(bool movie_side, int id, TrajEntry& entry) {
  if (!data_) throw std::logic_error("scorer: no dataset attached");
  Side& side = movie_side ? movie_side_ : user_side_;
  const auto& sessions =
      movie_side ? data_->movie_sessions[id] : data_->user_sessions[id];

  Vec h0;
  const Vec* h0_ptr = nullptr;
  if (cfg_.variant == MixtureVariant::kV2) {
    h0 = v2_initial_state(movie_side, id);
    h0_ptr = &h0;
  }

  Vec content_x;
  const Vec* content_ptr = nullptr;
  if (movie_side && content_proj_ && content_enabled_ && content_ &&
      content_->has(id)) {
    content_x = content_proj_->mat() *
                content_->features.row(id).matrix().transpose();
    content_ptr = &content_x;
  }

  ContextForwardFn ctx_fn;
  if (cfg_.variant == MixtureVariant::kV3) {
    const ParamTensor& factors = movie_side ? *em_ : *eu_;
    Vec e = factors.row(id).matrix().transpose();
    ctx_fn = [e](int, const Vec&) { return e; };
  } else if (cfg_.variant == MixtureVariant::kV4) {
    TrajEntry* ep = &entry;
    ctx_fn = [this, movie_side, ep](int, const Vec& h_prev) {
      Vec w;
      Vec ctx = attention_forward(movie_side, h_prev, heavy_ ? &w : nullptr);
      if (heavy_) ep->attn_weights.push_back(std::move(w));
      return ctx;
    };
  }

  entry.traj = encode_trajectory(side.cell, &side.embedder, sessions,
                                 content_ptr, ctx_fn, h0_ptr, heavy_);
  if (heavy_) {
    entry.dh.assign(entry.traj.steps.size(), Vec());
    entry.has_grad = false;
  }
}

const Trajectory& ScorerModel::user_trajectory(int user) {
  if (user < 0 || user >= num_users_)
    throw std::out_of_range("scorer: user index out of range");
  return ensure_entity(false, user).traj;
}

const Trajectory& ScorerModel::movie_trajectory(int movie) {
  if (movie < 0 || movie >= num_movies_)
    throw std::out_of_range("scorer: movie index out of range");
  return ensure_entity(true, movie).traj;
}

real ScorerModel::score_s(int user, int movie, int t) {
  if (user < 0 || user >= num_users_)
    throw std::out_of_range("scorer: user index out of range");
  if (movie < 0 || movie >= num_movies_)
    throw std::out_of_range("scorer: movie index out of range");
  const Trajectory& tu = ensure_entity(false, user).traj;
  const Trajectory& tm = ensure_entity(true, movie).traj;
  const Vec& hu = tu.state_at(t);
  const Vec& hm = tm.state_at(t);
  return eu_->row(user).matrix().dot(em_->row(movie).matrix()) + hu.dot(hm) +
         bu_->values[user] + bm_->values[movie];
}

void ScorerModel::backward(const std::vector<ScoreGrad>& upstream) {
  if (!heavy_)
    throw std::logic_error("scorer: backward requires a heavy pass");
  for (const auto& g : upstream) {
    TrajEntry& tu = ensure_entity(false, g.user);
    TrajEntry& tm = ensure_entity(true, g.movie);
    const Vec& hu = tu.traj.state_at(g.t);
    const Vec& hm = tm.traj.state_at(g.t);

    bu_->grad[g.user] += g.d_s;
    bm_->grad[g.movie] += g.d_s;
    if (cfg_.train_factors) {
      eu_->grad_row(g.user) += g.d_s * em_->row(g.movie);
      em_->grad_row(g.movie) += g.d_s * eu_->row(g.user);
    }
    const int iu = tu.traj.content_steps + g.t;
    const int im = tm.traj.content_steps + g.t;
    if (tu.dh[iu].size() == 0) tu.dh[iu] = Vec::Zero(cfg_.hidden);
    if (tm.dh[im].size() == 0) tm.dh[im] = Vec::Zero(cfg_.hidden);
    tu.dh[iu] += g.d_s * hm;
    tm.dh[im] += g.d_s * hu;
    tu.has_grad = true;
    tm.has_grad = true;
  }

  for (auto& [id, entry] : user_traj_)
    if (entry.has_grad) backward_entity(false, id, entry);
  for (auto& [id, entry] : movie_traj_)
    if (entry.has_grad) backward_entity(true, id, entry);
}

void ScorerModel::backward_entity(bool movie_side, int id, TrajEntry& entry) {
  Side& side = movie_side ? movie_side_ : user_side_;
  ParamTensor& factors = movie_side ? *em_ : *eu_;

  ContextBackwardFn ctx_bwd;
  if (cfg_.variant == MixtureVariant::kV3) {
    if (cfg_.train_factors) {
      ctx_bwd = [&factors, id](int, const Vec&, const Vec& dctx, Vec&) {
        factors.grad_row(id) += dctx.transpose();
      };
    }
  } else if (cfg_.variant == MixtureVariant::kV4) {
    TrajEntry* ep = &entry;
    ctx_bwd = [this, movie_side, ep](int step, const Vec& h_prev,
                                     const Vec& dctx, Vec& dh_prev) {
      attention_backward(movie_side, h_prev, ep->attn_weights[step], dctx,
                         dh_prev);
    };
  }

  BpttResult res =
      bptt_backward(side.cell, &side.embedder, entry.traj, entry.dh, ctx_bwd);

  if (res.d_content_x.size() != 0) {
    content_proj_->grad_mat() +=
        res.d_content_x * content_->features.row(id).matrix();
  }
  if (cfg_.variant == MixtureVariant::kV2) {
    const Vec e = factors.row(id).matrix().transpose();
    if (cfg_.v2_identity_map) {
      if (cfg_.train_factors)
        factors.grad_row(id) += res.d_h0.transpose();
    } else {
      side.init_W->grad_mat() += res.d_h0 * e.transpose();
      side.init_b->grad_vec() += res.d_h0;
      if (cfg_.train_factors)
        factors.grad_row(id) +=
            (side.init_W->mat().transpose() * res.d_h0).transpose();
    }
  }
  entry.has_grad = false;
  std::fill(entry.dh.begin(), entry.dh.end(), Vec());
}

}  // namespace lsic
