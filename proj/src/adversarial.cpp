#include "lsic/adversarial.hpp"

#include "lsic/eval.hpp"
#include "lsic/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace lsic {

real d_hinge(real g_pos, real g_neg, real margin) {
  return std::max(real(0), margin - g_pos + g_neg);
}

real compress_hinge(real hinge, real margin) {
  return std::clamp(hinge / margin, real(0), real(1));
}

real reward_value(real compressed, real floor_delta) {
  return std::log(std::max(compressed, floor_delta));
}

std::vector<real> normalize_rewards(const std::vector<real>& rewards) {
  if (rewards.empty()) return {};
  if (rewards.size() == 1) return {real(0)};
  real mean = 0;
  for (real r : rewards) mean += r;
  mean /= real(rewards.size());
  real var = 0;
  for (real r : rewards) var += (r - mean) * (r - mean);
  var /= real(rewards.size());  // population variance
  const real sd = std::max(std::sqrt(var), real(1e-8));
  std::vector<real> out(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i)
    out[i] = (rewards[i] - mean) / sd;
  return out;
}

Vec softmax(const Vec& scores) {
  const real m = scores.maxCoeff();
  Vec w = (scores.array() - m).exp().matrix();
  return w / w.sum();
}

DrawResult sample_from_scores(const Vec& scores, int k, Rng& rng) {
  if (k <= 0) throw std::invalid_argument("sample_from_scores: k must be > 0");
  if (scores.size() == 0)
    throw std::invalid_argument("sample_from_scores: empty candidate set");
  const real m = scores.maxCoeff();
  Vec w = (scores.array() - m).exp().matrix();
  const real total = w.sum();
  Vec cum(w.size());
  real acc = 0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    acc += w[i];
    cum[i] = acc;
  }
  const real logz = std::log(total) + m;

  DrawResult out;
  out.indices.reserve(k);
  out.log_probs.reserve(k);
  for (int i = 0; i < k; ++i) {
    const real r = rng.uniform() * total;
    const real* begin = cum.data();
    const real* end = cum.data() + cum.size();
    const real* it = std::upper_bound(begin, end, r);
    int idx = static_cast<int>(it - begin);
    if (idx >= static_cast<int>(cum.size()))
      idx = static_cast<int>(cum.size()) - 1;
    out.indices.push_back(idx);
    out.log_probs.push_back(scores[idx] - logz);
  }
  return out;
}

std::vector<real> reinforce_coefficients(const Vec& probs,
                                         const std::vector<int>& draws,
                                         const std::vector<real>& rewards) {
  if (draws.size() != rewards.size())
    throw std::invalid_argument("reinforce_coefficients: size mismatch");
  const int k = static_cast<int>(draws.size());
  std::vector<real> coeff(probs.size(), real(0));
  real reward_sum = 0;
  for (int i = 0; i < k; ++i) {
    coeff[draws[i]] += rewards[i];
    reward_sum += rewards[i];
  }
  const real inv_k = real(1) / real(k);
  for (Eigen::Index c = 0; c < probs.size(); ++c)
    coeff[c] = inv_k * (coeff[c] - reward_sum * probs[c]);
  return coeff;
}

int sample_negative_movie(const TrainIndex& ix, int user, int num_movies,
                          Rng& rng) {
  const auto& negs = ix.user_negative_movies[user];
  if (!negs.empty()) return negs[rng.uniform_int(static_cast<int>(negs.size()))];
  const auto& rated = ix.user_rated[user];
  if (static_cast<int>(rated.size()) >= num_movies)
    return rng.uniform_int(num_movies);  // degenerate user, any movie
  int m;
  do {
    m = rng.uniform_int(num_movies);
  } while (std::binary_search(rated.begin(), rated.end(), m));
  return m;
}

std::vector<real> pretrain_pairwise(ScorerModel& model, const TrainIndex& ix,
                                    const PretrainConfig& cfg, Rng& rng) {
  if (ix.positives.empty())
    throw TrainingError("pretrain: no positive training events");
  OptimizerConfig opt;
  opt.learning_rate = cfg.learning_rate;
  opt.clip_range = cfg.clip;
  opt.l2_lambda = cfg.l2;

  std::vector<real> epoch_loss;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    real loss_sum = 0;
    std::int64_t pairs = 0;
    for (int step = 0; step < cfg.steps_per_epoch; ++step) {
      model.begin_pass(true);
      std::vector<ScorerModel::ScoreGrad> upstream;
      const real inv = real(1) / real(cfg.batch);
      for (int b = 0; b < cfg.batch; ++b) {
        const auto& pos =
            ix.positives[rng.uniform_index(ix.positives.size())];
        const int m_neg =
            sample_negative_movie(ix, pos.user, model.num_movies(), rng);
        const real s_pos = model.score_s(pos.user, pos.movie, pos.session);
        const real s_neg = model.score_s(pos.user, m_neg, pos.session);
        const real g_pos = logistic(s_pos);
        const real g_neg = logistic(s_neg);
        const real h = d_hinge(g_pos, g_neg, cfg.margin);
        loss_sum += h;
        ++pairs;
        if (h > 0) {
          upstream.push_back(
              {pos.user, pos.movie, pos.session,
               -inv * g_pos * (1 - g_pos)});
          upstream.push_back(
              {pos.user, m_neg, pos.session, inv * g_neg * (1 - g_neg)});
        }
      }
      model.backward(upstream);
      sgd_step(model.params(), opt);
    }
    model.begin_pass(false);
    epoch_loss.push_back(pairs > 0 ? loss_sum / real(pairs) : real(0));
  }
  return epoch_loss;
}

std::string curve_to_csv(const std::vector<CurvePoint>& curve,
                         const std::string& config_hash) {
  std::ostringstream os;
  os << "# config_hash=" << config_hash << "\n";
  os << "epoch,precision_at_5,ndcg_at_5,mean_reward,d_loss,d_pair_acc\n";
  char buf[256];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  p.epoch, p.precision_at_5, p.ndcg_at_5, p.mean_reward,
                  p.d_loss, p.d_pair_acc);
    os << buf;
  }
  return os.str();
}

std::vector<CurvePoint> curve_from_csv(const std::string& body) {
  std::vector<CurvePoint> curve;
  std::istringstream is(body);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("epoch", 0) == 0) continue;
    CurvePoint p;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf,%lf", &p.epoch,
                    &p.precision_at_5, &p.ndcg_at_5, &p.mean_reward, &p.d_loss,
                    &p.d_pair_acc) == 6)
      curve.push_back(p);
  }
  return curve;
}

AdversarialTrainer::AdversarialTrainer(
    ScorerModel& generator, ScorerModel& discriminator,
    const SessionizedDataset& sd, const TrainIndex& ix,
    const std::vector<RatingEvent>& validation,
    const FactorStore& candidate_factors, const AdvConfig& cfg,
    std::uint64_t seed)
    : gen_(generator),
      disc_(discriminator),
      sd_(sd),
      ix_(ix),
      cfg_(cfg),
      rng_(seed) {
  if (ix_.positives.empty())
    throw TrainingError("adversarial: no positive training events");

  g_opt_.learning_rate = cfg_.g_lr;
  g_opt_.clip_range = cfg_.clip;
  g_opt_.l2_lambda = cfg_.l2;
  d_opt_.learning_rate = cfg_.d_lr;
  d_opt_.clip_range = cfg_.clip;
  d_opt_.l2_lambda = cfg_.l2;

  // Candidate sets are frozen from the pretrained factors.
  candidates_.resize(sd_.num_users);
  for (int u = 0; u < sd_.num_users; ++u) {
    if (cfg_.rerank) {
      candidates_[u] =
          mf_top_candidates(candidate_factors, u, ix_.user_rated[u],
                            cfg_.candidate_n)
              .movies;
    } else {
      candidates_[u] = unrated_universe(ix_, u, sd_.num_movies);
    }
  }

  RankingContext ctx =
      build_ranking_context(validation, ix_, sd_.num_users);
  val_positives_ = std::move(ctx.positives_by_user);
  val_users_ = std::move(ctx.users);
  if (cfg_.validation_user_cap > 0 &&
      static_cast<int>(val_users_.size()) > cfg_.validation_user_cap) {
    // Deterministic subset independent of the training stream.
    Rng pick(seed ^ 0x76616c75736572ULL);
    std::vector<int> chosen = pick.sample_without_replacement(
        static_cast<int>(val_users_.size()), cfg_.validation_user_cap);
    std::vector<int> capped;
    capped.reserve(chosen.size());
    for (int i : chosen) capped.push_back(val_users_[i]);
    val_users_ = std::move(capped);
  }

  gen_.begin_pass(false);
  disc_.begin_pass(false);
}

void AdversarialTrainer::restore_state(const TrainerState& st,
                                       const std::string& rng_state) {
  state_ = st;
  rng_.restore(rng_state);
  gen_.begin_pass(false);
  disc_.begin_pass(false);
}

real AdversarialTrainer::reward(int user, int movie_k, int movie_pos, int t) {
  const real g_pos = disc_.score(user, movie_pos, t);
  const real g_k = disc_.score(user, movie_k, t);
  const real h = d_hinge(g_pos, g_k, cfg_.margin);
  return reward_value(compress_hinge(h, cfg_.margin), cfg_.reward_floor);
}

DrawResult AdversarialTrainer::g_sample(int user, int t, int k) {
  const auto& cands = candidates_[user];
  if (cands.empty())
    throw TrainingError("g_sample: user has no candidate movies");
  Vec scores(cands.size());
  for (std::size_t c = 0; c < cands.size(); ++c)
    scores[static_cast<Eigen::Index>(c)] = gen_.score_s(user, cands[c], t);
  return sample_from_scores(scores, k, rng_);
}

AdversarialTrainer::GStepInfo AdversarialTrainer::g_step() {
  gen_.begin_pass(true);

  struct Context {
    int user, t;
    std::vector<int> cands;
    Vec probs;
    DrawResult draws;
    std::size_t reward_offset;
  };
  std::vector<Context> contexts;
  std::vector<real> all_rewards;

  for (int b = 0; b < cfg_.batch; ++b) {
    // A (user, t) pair with at least one candidate movie.
    int tries = 0;
    const TrainIndex::FlatPositive* pos = nullptr;
    do {
      pos = &ix_.positives[rng_.uniform_index(ix_.positives.size())];
      ++tries;
    } while (candidates_[pos->user].empty() && tries < 64);
    if (candidates_[pos->user].empty()) continue;

    Context ctx;
    ctx.user = pos->user;
    ctx.t = pos->session;
    ctx.cands = candidates_[pos->user];

    Vec scores(ctx.cands.size());
    for (std::size_t c = 0; c < ctx.cands.size(); ++c)
      scores[static_cast<Eigen::Index>(c)] =
          gen_.score_s(ctx.user, ctx.cands[c], ctx.t);
    ctx.probs = softmax(scores);
    ctx.draws = sample_from_scores(scores, cfg_.num_samples, rng_);

    ctx.reward_offset = all_rewards.size();
    const auto& user_pos = ix_.user_positives[ctx.user];
    for (int k = 0; k < cfg_.num_samples; ++k) {
      const auto& pref = user_pos[rng_.uniform_index(user_pos.size())];
      all_rewards.push_back(
          reward(ctx.user, ctx.cands[ctx.draws.indices[k]], pref.movie, ctx.t));
    }
    contexts.push_back(std::move(ctx));
  }

  GStepInfo info;
  info.contexts = static_cast<int>(contexts.size());
  if (contexts.empty()) return info;
  double raw_sum = 0;
  for (real r : all_rewards) raw_sum += r;
  info.mean_raw_reward = raw_sum / static_cast<double>(all_rewards.size());

  const std::vector<real> normalized = normalize_rewards(all_rewards);

  std::vector<ScorerModel::ScoreGrad> upstream;
  const real inv_contexts = real(1) / real(contexts.size());
  for (const auto& ctx : contexts) {
    std::vector<real> rewards(
        normalized.begin() + static_cast<std::ptrdiff_t>(ctx.reward_offset),
        normalized.begin() +
            static_cast<std::ptrdiff_t>(ctx.reward_offset + cfg_.num_samples));
    std::vector<real> coeff =
        reinforce_coefficients(ctx.probs, ctx.draws.indices, rewards);
    for (std::size_t c = 0; c < ctx.cands.size(); ++c) {
      if (coeff[c] == real(0)) continue;
      // Ascend the estimator: the optimizer descends, so negate.
      upstream.push_back(
          {ctx.user, ctx.cands[c], ctx.t, -coeff[c] * inv_contexts});
    }
  }
  gen_.backward(upstream);
  sgd_step(gen_.params(), g_opt_);
  gen_.begin_pass(false);
  return info;
}

double AdversarialTrainer::d_step() {
  disc_.begin_pass(true);
  std::vector<ScorerModel::ScoreGrad> upstream;
  double loss_sum = 0;
  int pair_count = 0;
  const real eps = cfg_.margin;
  const real delta = cfg_.d_log_epsilon;

  struct Pair {
    int user, pos, other, t;
  };
  std::vector<Pair> pairs;
  for (int b = 0; b < cfg_.batch; ++b) {
    const auto& pos = ix_.positives[rng_.uniform_index(ix_.positives.size())];
    const int m_neg =
        sample_negative_movie(ix_, pos.user, sd_.num_movies, rng_);
    pairs.push_back({pos.user, pos.movie, m_neg, pos.session});
    if (!candidates_[pos.user].empty()) {
      DrawResult d = g_sample(pos.user, pos.session, 1);
      pairs.push_back({pos.user, pos.movie,
                       candidates_[pos.user][d.indices[0]], pos.session});
    }
  }

  const real inv = real(1) / real(pairs.size());
  for (const auto& p : pairs) {
    const real s_pos = disc_.score_s(p.user, p.pos, p.t);
    const real s_other = disc_.score_s(p.user, p.other, p.t);
    const real g_pos = logistic(s_pos);
    const real g_other = logistic(s_other);
    const real h = d_hinge(g_pos, g_other, eps);
    const real compressed = compress_hinge(h, eps);
    const real prob_correct = 1 - compressed;
    loss_sum += -std::log(double(prob_correct) + double(delta));
    ++pair_count;
    if (h > 0 && h < eps) {
      // dL/dh = 1 / (eps * (prob_correct + delta)) inside the clip band.
      const real dl_dh = real(1) / (eps * (prob_correct + delta));
      upstream.push_back(
          {p.user, p.pos, p.t, -inv * dl_dh * g_pos * (1 - g_pos)});
      upstream.push_back(
          {p.user, p.other, p.t, inv * dl_dh * g_other * (1 - g_other)});
    }
  }
  disc_.backward(upstream);
  sgd_step(disc_.params(), d_opt_);
  disc_.begin_pass(false);
  return pair_count > 0 ? loss_sum / pair_count : 0.0;
}

CurvePoint AdversarialTrainer::validate(int epoch_index) {
  CurvePoint p;
  p.epoch = epoch_index;
  const int t_eval = sd_.last_session();

  int evaluated = 0;
  double p5 = 0, n5 = 0, acc = 0;
  int acc_count = 0;
  for (int u : val_users_) {
    const auto& positives = val_positives_[u];
    const auto& cands = candidates_[u];
    if (cands.empty()) continue;
    RankedList list = rank_candidates(
        u, cands,
        [this, t_eval](int uu, int mm) { return gen_.score_s(uu, mm, t_eval); },
        positives, static_cast<int>(positives.size()));
    p5 += precision_at_n(list, 5);
    n5 += ndcg_at_n(list, 5);
    ++evaluated;

    // Discriminator pairwise accuracy on (true positive, generated) pairs.
    DrawResult d = g_sample(u, t_eval, 1);
    const int m_gen = cands[d.indices[0]];
    const int m_pos = positives[rng_.uniform_index(positives.size())];
    const real gp = disc_.score_s(u, m_pos, t_eval);
    const real gg = disc_.score_s(u, m_gen, t_eval);
    acc += (gp > gg) ? 1.0 : (gp == gg ? 0.5 : 0.0);
    ++acc_count;
  }
  if (evaluated > 0) {
    p.precision_at_5 = p5 / evaluated;
    p.ndcg_at_5 = n5 / evaluated;
  }
  if (acc_count > 0) p.d_pair_acc = acc / acc_count;
  if (!std::isfinite(p.precision_at_5) || !std::isfinite(p.ndcg_at_5))
    throw TrainingError("validation metric is not finite");
  return p;
}

void AdversarialTrainer::run(int epochs, const EpochCallback& cb) {
  for (int e = 0; e < epochs; ++e) {
    double reward_sum = 0;
    int reward_steps = 0;
    for (int s = 0; s < cfg_.g_steps; ++s) {
      GStepInfo info = g_step();
      if (info.contexts > 0) {
        reward_sum += info.mean_raw_reward;
        ++reward_steps;
      }
    }
    double d_loss_sum = 0;
    for (int s = 0; s < cfg_.d_steps; ++s) d_loss_sum += d_step();

    CurvePoint p = validate(state_.epoch + 1);
    p.mean_reward = reward_steps > 0 ? reward_sum / reward_steps : 0.0;
    p.d_loss = cfg_.d_steps > 0 ? d_loss_sum / cfg_.d_steps : 0.0;
    state_.curve.push_back(p);
    ++state_.epoch;

    const bool is_best = p.ndcg_at_5 > state_.best_ndcg;
    if (is_best) {
      state_.best_ndcg = p.ndcg_at_5;
      state_.best_epoch = state_.epoch;
    }
    if (cb) cb(state_, is_best);
  }
}

}  // namespace lsic
