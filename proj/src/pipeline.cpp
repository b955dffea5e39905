#include "lsic/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace lsic {

namespace {

RatingDataset load_source_dataset(const RunConfig& cfg) {
  if (cfg.data_format == "surrogate") return make_surrogate_ml100k(cfg.seed);
  if (cfg.data_path.empty())
    throw ConfigError("config: data.path is required for format '" +
                      cfg.data_format + "'");
  if (cfg.data_format == "netflix") return parse_netflix(cfg.data_path);
  return parse_movielens(cfg.data_path);
}

DataBundle finish_bundle(RatingDataset ds, const RunConfig& cfg) {
  label_feedback(ds, label_scheme_from_string(cfg.label_scheme));

  SplitSpec spec;
  spec.train_end = parse_time(cfg.train_end);
  spec.test_end = parse_time(cfg.test_end);
  spec.validation_fraction = cfg.validation_fraction;
  spec.session_length_days = cfg.session_days;

  DataBundle out;
  out.split = time_split(ds, spec, cfg.seed);
  out.sessions = sessionize(out.split.train, ds.num_users, ds.num_movies,
                            cfg.session_days, ds.start_timestamp());
  out.index = build_train_index(out.sessions);
  if (!cfg.content_path.empty()) {
    out.content = load_content_features(cfg.content_path, ds);
    out.has_content = true;
  }
  out.dataset = std::move(ds);
  return out;
}

}  // namespace

DataBundle prepare_data_from_source(const RunConfig& cfg) {
  return finish_bundle(load_source_dataset(cfg), cfg);
}

DataBundle prepare_data_from_artifacts(const RunConfig& cfg) {
  const std::string path = cfg.out_dir + "/dataset.tsv";
  if (!fs::exists(path))
    throw IoError("ingest artifact missing: " + path + " (run ingest first)");
  return finish_bundle(parse_movielens(path), cfg);
}

DataBundle bundle_dataset(RatingDataset ds, const SplitSpec& spec,
                          const ContentFeatures* content, std::uint64_t seed) {
  DataBundle out;
  out.split = time_split(ds, spec, seed);
  out.sessions = sessionize(out.split.train, ds.num_users, ds.num_movies,
                            spec.session_length_days, ds.start_timestamp());
  out.index = build_train_index(out.sessions);
  if (content) {
    out.content = *content;
    out.has_content = true;
  }
  out.dataset = std::move(ds);
  return out;
}

ScorerConfig scorer_config_from(const RunConfig& cfg, const DataBundle& data) {
  ScorerConfig sc;
  sc.variant = mixture_from_string(cfg.mixture);
  sc.factor_dim = cfg.mf_dim;
  sc.hidden = cfg.hidden;
  sc.input_dim = cfg.input_dim;
  sc.attn_hidden = cfg.attn_hidden;
  sc.content_dim =
      (data.has_content && cfg.content_enabled) ? data.content.dim : 0;
  sc.v2_identity_map = cfg.v2_identity_map;
  sc.attention_pool_users = cfg.attention_pool_users;
  sc.attention_pool_movies = cfg.attention_pool_movies;
  sc.train_factors = cfg.train_factors;
  sc.pool_seed = cfg.seed ^ 0x706f6f6cULL;
  return sc;
}

AdvConfig adv_config_from(const RunConfig& cfg) {
  AdvConfig ac;
  ac.margin = static_cast<real>(cfg.margin);
  ac.num_samples = cfg.num_samples;
  ac.batch = cfg.adv_batch;
  ac.g_lr = static_cast<real>(cfg.adv_lr_g);
  ac.d_lr = static_cast<real>(cfg.adv_lr_d);
  ac.clip = static_cast<real>(cfg.clip);
  ac.l2 = static_cast<real>(cfg.l2);
  ac.g_steps = cfg.g_steps;
  ac.d_steps = cfg.d_steps;
  ac.reward_floor = static_cast<real>(cfg.reward_floor);
  ac.d_log_epsilon = static_cast<real>(cfg.d_log_epsilon);
  ac.candidate_n = cfg.candidate_n;
  ac.rerank = cfg.candidate_mode == "rerank";
  ac.validation_user_cap = cfg.validation_user_cap;
  return ac;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::trunc | std::ios::binary);
  if (!os) throw IoError("cannot write file: " + path);
  os << content;
  if (!os) throw IoError("failed writing file: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open file: " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void run_ingest(const RunConfig& cfg, std::ostream& out) {
  RatingDataset ds = load_source_dataset(cfg);
  fs::create_directories(cfg.out_dir);
  write_dataset(ds, cfg.out_dir + "/dataset.tsv");
  write_id_map(ds.user_raw_ids, cfg.out_dir + "/users.map");
  write_id_map(ds.movie_raw_ids, cfg.out_dir + "/movies.map");

  DataBundle bundle = finish_bundle(std::move(ds), cfg);
  write_split_manifest(bundle.split, cfg.out_dir + "/split_manifest.txt",
                       cfg.hash());

  DatasetStats stats = compute_stats(bundle.dataset, &bundle.split);
  std::ostringstream summary;
  summary << "# config_hash=" << cfg.hash() << "\n" << stats.format_table();
  summary << "sessions           " << bundle.sessions.session_count << "\n";
  if (bundle.has_content) {
    summary << "content dim        " << bundle.content.dim << "\n";
    summary << "content missing    " << bundle.content.missing.size() << "\n";
  }
  write_text_file(cfg.out_dir + "/ingest_summary.txt", summary.str());
  out << summary.str();
}

namespace {

TrainOutput build_models(const RunConfig& cfg, const DataBundle& data) {
  TrainOutput out;
  const ScorerConfig sc = scorer_config_from(cfg, data);
  Rng g_init(cfg.seed ^ 0x67656eULL);
  Rng d_init(cfg.seed ^ 0x646973ULL);
  out.generator = std::make_unique<ScorerModel>(
      sc, data.sessions.num_users, data.sessions.num_movies, g_init);
  out.discriminator = std::make_unique<ScorerModel>(
      sc, data.sessions.num_users, data.sessions.num_movies, d_init);
  const ContentFeatures* cf = data.has_content ? &data.content : nullptr;
  out.generator->attach_data(&data.sessions, cf);
  out.discriminator->attach_data(&data.sessions, cf);
  return out;
}

void save_epoch_checkpoint(const TrainOutput& models, const DataBundle& data,
                           const RunConfig& cfg, AdversarialTrainer& trainer,
                           const std::string& dir) {
  Checkpoint ck = make_train_checkpoint(models, data, cfg, trainer.rng().state());
  TrainerState& st = trainer.state();
  ck.counters["epoch"] = st.epoch;
  ck.counters["best_epoch"] = st.best_epoch;
  char best_ndcg_buf[32];
  std::snprintf(best_ndcg_buf, sizeof(best_ndcg_buf), "%.17g", st.best_ndcg);
  ck.strings["best_ndcg"] = best_ndcg_buf;
  ck.strings["curve"] = curve_to_csv(st.curve, cfg.hash());
  char name[64];
  std::snprintf(name, sizeof(name), "/epoch_%04d.ckpt", st.epoch);
  ck.save(dir + name);
  write_text_file(dir + "/learning_curve.csv",
                  curve_to_csv(st.curve, cfg.hash()));
}

}  // namespace

Checkpoint make_train_checkpoint(const TrainOutput& models,
                                 const DataBundle& data, const RunConfig& cfg,
                                 const std::string& rng_state) {
  Checkpoint ck;
  ck.put_set("g.", models.generator->params());
  ck.put_set("d.", models.discriminator->params());

  ParamTensor eu("user_factors", {models.mf.num_users(), models.mf.dim()});
  eu.mat() = models.mf.user_factors;
  ParamTensor em("movie_factors", {models.mf.num_movies(), models.mf.dim()});
  em.mat() = models.mf.movie_factors;
  ParamTensor bu("user_bias", {models.mf.num_users()});
  bu.vec() = models.mf.user_bias;
  ParamTensor bm("movie_bias", {models.mf.num_movies()});
  bm.vec() = models.mf.movie_bias;
  ck.put("mf.user_factors", eu);
  ck.put("mf.movie_factors", em);
  ck.put("mf.user_bias", bu);
  ck.put("mf.movie_bias", bm);

  ck.counters["num_users"] = data.sessions.num_users;
  ck.counters["num_movies"] = data.sessions.num_movies;
  ck.counters["session_count"] = data.sessions.session_count;
  ck.counters["factor_dim"] = cfg.mf_dim;
  ck.strings["config_hash"] = cfg.hash();
  ck.strings["variant"] = cfg.mixture;
  ck.strings["rng_state"] = rng_state;
  return ck;
}

std::string newest_epoch_checkpoint(const std::string& dir) {
  if (!fs::exists(dir)) return "";
  std::string best;
  int best_epoch = -1;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    int epoch;
    if (std::sscanf(name.c_str(), "epoch_%d.ckpt", &epoch) == 1 &&
        epoch > best_epoch) {
      best_epoch = epoch;
      best = entry.path().string();
    }
  }
  return best;
}

TrainOutput restore_models(const Checkpoint& ck, const DataBundle& data,
                           const RunConfig& cfg) {
  if (ck.counters.at("num_users") != data.sessions.num_users ||
      ck.counters.at("num_movies") != data.sessions.num_movies)
    throw ConfigError("checkpoint/config mismatch: different U or M");

  TrainOutput out = build_models(cfg, data);
  ck.fill_set("g.", out.generator->params());
  ck.fill_set("d.", out.discriminator->params());

  const int d = static_cast<int>(ck.counters.at("factor_dim"));
  ParamTensor eu("user_factors", {data.sessions.num_users, d});
  ParamTensor em("movie_factors", {data.sessions.num_movies, d});
  ParamTensor bu("user_bias", {data.sessions.num_users});
  ParamTensor bm("movie_bias", {data.sessions.num_movies});
  ck.fill("mf.user_factors", eu);
  ck.fill("mf.movie_factors", em);
  ck.fill("mf.user_bias", bu);
  ck.fill("mf.movie_bias", bm);
  out.mf.user_factors = eu.mat();
  out.mf.movie_factors = em.mat();
  out.mf.user_bias = bu.vec();
  out.mf.movie_bias = bm.vec();

  out.state.epoch = static_cast<int>(ck.counters.count("epoch")
                                         ? ck.counters.at("epoch")
                                         : 0);
  if (ck.counters.count("best_epoch"))
    out.state.best_epoch = static_cast<int>(ck.counters.at("best_epoch"));
  if (ck.strings.count("best_ndcg"))
    out.state.best_ndcg = std::stod(ck.strings.at("best_ndcg"));
  if (ck.strings.count("curve"))
    out.state.curve = curve_from_csv(ck.strings.at("curve"));

  out.generator->begin_pass(false);
  out.discriminator->begin_pass(false);
  return out;
}

TrainOutput run_training(const DataBundle& data, const RunConfig& cfg,
                         bool resume, std::ostream* log) {
  const bool writing = !cfg.out_dir.empty();
  if (writing) fs::create_directories(cfg.out_dir);

  TrainOutput out;
  std::string resume_path =
      resume && writing ? newest_epoch_checkpoint(cfg.out_dir) : "";
  std::string resume_rng;

  if (!resume_path.empty()) {
    Checkpoint ck = Checkpoint::load(resume_path);
    if (ck.strings.at("config_hash") != cfg.hash())
      throw ConfigError("checkpoint/config mismatch: config hash differs (" +
                        resume_path + ")");
    out = restore_models(ck, data, cfg);
    resume_rng = ck.strings.at("rng_state");
    if (log)
      *log << "resuming from " << resume_path << " (epoch " << out.state.epoch
           << ")\n";
  } else {
    out = build_models(cfg, data);

    // Phase 1: matrix factorization pretraining.
    MfTrainConfig mf_cfg;
    mf_cfg.dim = cfg.mf_dim;
    mf_cfg.learning_rate = static_cast<real>(cfg.mf_lr);
    mf_cfg.l2_lambda = static_cast<real>(cfg.l2);
    mf_cfg.clip_range = static_cast<real>(cfg.clip);
    mf_cfg.epochs = cfg.mf_epochs;
    mf_cfg.batch_size = cfg.mf_batch;
    Rng mf_rng(cfg.seed ^ 0x6d66ULL);
    out.mf = mf_train(data.split.train, data.sessions.num_users,
                      data.sessions.num_movies, mf_cfg, mf_rng, &out.mf_log);
    out.generator->set_factors(out.mf);
    out.discriminator->set_factors(out.mf);
    if (log && !out.mf_log.empty())
      *log << "mf pretrain: objective " << out.mf_log.front().objective
           << " -> " << out.mf_log.back().objective << " over "
           << out.mf_log.size() << " epochs\n";

    // Phase 2: pairwise pretraining of both players.
    PretrainConfig pre;
    pre.epochs = cfg.pretrain_epochs;
    pre.steps_per_epoch = cfg.pretrain_steps;
    pre.batch = cfg.pretrain_batch;
    pre.learning_rate = static_cast<real>(cfg.pretrain_lr);
    pre.clip = static_cast<real>(cfg.clip);
    pre.l2 = static_cast<real>(cfg.l2);
    pre.margin = static_cast<real>(cfg.margin);
    Rng pg(cfg.seed ^ 0x7067ULL), pd(cfg.seed ^ 0x7064ULL);
    out.g_pretrain_loss = pretrain_pairwise(*out.generator, data.index, pre, pg);
    out.d_pretrain_loss =
        pretrain_pairwise(*out.discriminator, data.index, pre, pd);
    if (log && !out.g_pretrain_loss.empty())
      *log << "pairwise pretrain: g hinge " << out.g_pretrain_loss.front()
           << " -> " << out.g_pretrain_loss.back() << ", d hinge "
           << out.d_pretrain_loss.front() << " -> "
           << out.d_pretrain_loss.back() << "\n";
  }

  // Phase 3: adversarial alternation.
  AdversarialTrainer trainer(*out.generator, *out.discriminator, data.sessions,
                             data.index, data.split.validation, out.mf,
                             adv_config_from(cfg), cfg.seed ^ 0x616476ULL);

  auto save_best = [&](const TrainerState& st) {
    if (!writing) return;
    Checkpoint best =
        make_train_checkpoint(out, data, cfg, trainer.rng().state());
    best.counters["epoch"] = st.epoch;
    best.counters["best_epoch"] = st.best_epoch;
    best.save(cfg.out_dir + "/best.ckpt");
  };

  if (resume_path.empty()) {
    // Pretrained baseline: epoch-0 validation point, initial best.
    CurvePoint p0 = trainer.validate(0);
    trainer.state().curve.push_back(p0);
    trainer.state().best_ndcg = p0.ndcg_at_5;
    trainer.state().best_epoch = 0;
    if (writing) {
      save_epoch_checkpoint(out, data, cfg, trainer, cfg.out_dir);
      save_best(trainer.state());
    }
  } else {
    trainer.restore_state(out.state, resume_rng);
  }

  const int remaining = cfg.adv_epochs - trainer.state().epoch;
  trainer.run(std::max(0, remaining),
              [&](const TrainerState& st, bool is_best) {
                if (writing) save_epoch_checkpoint(out, data, cfg, trainer,
                                                   cfg.out_dir);
                if (is_best) save_best(st);
                if (log) {
                  const CurvePoint& p = st.curve.back();
                  *log << "epoch " << p.epoch << ": p@5 " << p.precision_at_5
                       << " ndcg@5 " << p.ndcg_at_5 << " reward "
                       << p.mean_reward << " d_loss " << p.d_loss
                       << " d_acc " << p.d_pair_acc
                       << (is_best ? " *best*" : "") << "\n";
                }
              });

  out.state = trainer.state();
  if (writing)
    write_text_file(cfg.out_dir + "/learning_curve.csv",
                    curve_to_csv(out.state.curve, cfg.hash()));
  return out;
}

EvalOutput evaluate_test(const DataBundle& data, ScorerModel& generator,
                         const FactorStore& mf, const RunConfig& cfg,
                         bool content_enabled) {
  RankingContext ctx = build_ranking_context(data.split.test, data.index,
                                             data.sessions.num_users);
  const int t_eval = data.sessions.last_session();

  const bool was_enabled = generator.content_enabled();
  generator.set_content_enabled(content_enabled);
  generator.begin_pass(false);

  EvalOptions opt;
  opt.candidate_n = cfg.candidate_n;
  opt.rerank = cfg.candidate_mode == "rerank";
  opt.config_hash = cfg.hash();

  EvalOutput out;
  opt.label = "mixture-" + cfg.mixture +
              (content_enabled ? "" : " (no content)");
  out.mixture = evaluate_scorer(ctx, data.index, generator, mf, t_eval, opt);
  opt.label = "mf-only";
  out.mf_only =
      evaluate_mf_baseline(ctx, data.index, data.sessions.num_movies, mf, opt);

  generator.set_content_enabled(was_enabled);
  generator.begin_pass(false);
  return out;
}

std::string sweep_candidates_csv(const DataBundle& data, ScorerModel& generator,
                                 const FactorStore& mf, const RunConfig& cfg,
                                 const std::vector<int>& ns) {
  std::ostringstream os;
  os << "# config_hash=" << cfg.hash() << "\n";
  os << "n,precision_at_3,precision_at_5,precision_at_10,ndcg_at_3,ndcg_at_5,"
        "ndcg_at_10,mrr,map,mf_precision_at_5,mf_ndcg_at_5\n";
  char buf[400];
  for (int n : ns) {
    RunConfig c = cfg;
    c.candidate_n = n;
    c.candidate_mode = "rerank";
    EvalOutput ev = evaluate_test(data, generator, mf, c,
                                  generator.content_enabled());
    std::snprintf(buf, sizeof(buf),
                  "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,"
                  "%.10g\n",
                  n, double(ev.mixture.precision3), double(ev.mixture.precision5),
                  double(ev.mixture.precision10), double(ev.mixture.ndcg3),
                  double(ev.mixture.ndcg5), double(ev.mixture.ndcg10),
                  double(ev.mixture.mrr), double(ev.mixture.map),
                  double(ev.mf_only.precision5), double(ev.mf_only.ndcg5));
    os << buf;
  }
  return os.str();
}

std::string sweep_sessions_csv(const RunConfig& base,
                               const std::vector<int>& periods,
                               std::ostream* log) {
  if (periods.empty()) throw ConfigError("session sweep: no periods given");
  std::ostringstream os;
  os << "# config_hash=" << base.hash() << "\n";
  os << "period_days,precision_at_5,ndcg_at_5,mrr,map,mf_precision_at_5,"
        "mf_ndcg_at_5,mf_mrr,mf_map\n";
  char buf[400];
  for (int period : periods) {
    if (period < 1)
      throw ConfigError("session sweep: period must be >= 1 day");
    RunConfig cfg = base;
    cfg.session_days = period;
    cfg.out_dir.clear();  // no checkpoint spam from inner runs
    DataBundle data = prepare_data_from_source(cfg);
    TrainOutput models = run_training(data, cfg, false, log);
    EvalOutput ev = evaluate_test(data, *models.generator, models.mf, cfg,
                                  models.generator->content_enabled());
    std::snprintf(buf, sizeof(buf),
                  "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  period, double(ev.mixture.precision5),
                  double(ev.mixture.ndcg5), double(ev.mixture.mrr),
                  double(ev.mixture.map), double(ev.mf_only.precision5),
                  double(ev.mf_only.ndcg5), double(ev.mf_only.mrr),
                  double(ev.mf_only.map));
    os << buf;
  }
  return os.str();
}

}  // namespace lsic
