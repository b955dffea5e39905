#include <CLI11.hpp>

#include "lsic/pipeline.hpp"

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace lsic;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mixture;
  std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key = value config file");
  cmd->add_option("--set", args.overrides, "override: key=value")
      ->take_all();
  cmd->add_option("--seed", args.seed, "override the run seed");
  cmd->add_option("--mixture", args.mixture, "mixture variant v1..v4");
  cmd->add_option("--out-dir", args.out_dir, "output directory");
}

RunConfig resolve_config(const CommonArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg.load_file(args.config_path);
  for (const auto& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (args.seed) cfg.seed = *args.seed;
  if (args.mixture) cfg.mixture = *args.mixture;
  if (args.out_dir) cfg.out_dir = *args.out_dir;
  cfg.validate();
  return cfg;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    out.push_back(std::stoi(s.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

TrainOutput load_models_for_eval(const RunConfig& cfg,
                                 const std::string& checkpoint,
                                 const DataBundle& data) {
  std::string path = checkpoint;
  if (path.empty()) path = cfg.out_dir + "/best.ckpt";
  if (!fs::exists(path)) throw IoError("checkpoint not found: " + path);
  Checkpoint ck = Checkpoint::load(path);
  return restore_models(ck, data, cfg);
}

int dispatch(int argc, char** argv) {
  CLI::App app{
      "Long/short-term mixture recommender: MF profiles, session LSTMs, "
      "adversarial re-ranking"};
  app.require_subcommand(1);

  CommonArgs ingest_args, train_args, eval_args, rec_args, ssweep_args,
      csweep_args;

  auto* cmd_ingest = app.add_subcommand("ingest", "parse, split and sessionize");
  add_common(cmd_ingest, ingest_args);

  auto* cmd_train =
      app.add_subcommand("train", "MF + pairwise pretrain + adversarial phase");
  add_common(cmd_train, train_args);
  bool resume = false;
  cmd_train->add_flag("--resume", resume, "continue from the newest checkpoint");

  auto* cmd_evaluate = app.add_subcommand("evaluate", "test-set rank metrics");
  add_common(cmd_evaluate, eval_args);
  std::string eval_checkpoint;
  bool no_content = false;
  cmd_evaluate->add_option("--checkpoint", eval_checkpoint,
                           "checkpoint file (default <out_dir>/best.ckpt)");
  cmd_evaluate->add_flag("--no-content", no_content,
                         "score without poster features");

  auto* cmd_recommend =
      app.add_subcommand("recommend", "top-n unwatched movies for one user");
  add_common(cmd_recommend, rec_args);
  std::string rec_checkpoint;
  std::int64_t raw_user = -1;
  int top_n = 10;
  cmd_recommend->add_option("--checkpoint", rec_checkpoint, "checkpoint file");
  cmd_recommend->add_option("--user", raw_user, "raw user id")->required();
  cmd_recommend->add_option("-n,--top-n", top_n, "list length");

  auto* cmd_sweep_sessions = app.add_subcommand(
      "sweep-sessions", "retrain per session period and compare to MF");
  add_common(cmd_sweep_sessions, ssweep_args);
  std::string periods_arg = "7,14,30,60";
  cmd_sweep_sessions->add_option("--periods", periods_arg,
                                 "comma-separated day lengths");

  auto* cmd_sweep_candidates = app.add_subcommand(
      "sweep-candidates", "re-rank quality vs MF candidate count");
  add_common(cmd_sweep_candidates, csweep_args);
  std::string ns_arg = "20,50,100,200,500";
  std::string csweep_checkpoint;
  cmd_sweep_candidates->add_option("--ns", ns_arg, "comma-separated N values");
  cmd_sweep_candidates->add_option("--checkpoint", csweep_checkpoint,
                                   "checkpoint file");

  CLI11_PARSE(app, argc, argv);

  if (cmd_ingest->parsed()) {
    RunConfig cfg = resolve_config(ingest_args);
    run_ingest(cfg, std::cout);
    return 0;
  }

  if (cmd_train->parsed()) {
    RunConfig cfg = resolve_config(train_args);
    DataBundle data = prepare_data_from_artifacts(cfg);
    std::ostringstream log;
    TrainOutput models = run_training(data, cfg, resume, &log);
    write_text_file(cfg.out_dir + "/training_log.txt",
                    "# config_hash=" + cfg.hash() + "\n" + log.str());
    std::cout << log.str();
    std::cout << "best epoch " << models.state.best_epoch << " (ndcg@5 "
              << models.state.best_ndcg << ")\n";
    return 0;
  }

  if (cmd_evaluate->parsed()) {
    RunConfig cfg = resolve_config(eval_args);
    DataBundle data = prepare_data_from_artifacts(cfg);
    TrainOutput models = load_models_for_eval(cfg, eval_checkpoint, data);
    EvalOutput ev = evaluate_test(data, *models.generator, models.mf, cfg,
                                  !no_content && cfg.content_enabled);
    fs::create_directories(cfg.out_dir);
    const std::string suffix = no_content ? "_no_content" : "";
    write_text_file(cfg.out_dir + "/metrics_" + cfg.mixture + suffix + ".csv",
                    ev.mixture.to_csv());
    write_text_file(cfg.out_dir + "/metrics_mf.csv", ev.mf_only.to_csv());
    std::cout << ev.mixture.to_table() << ev.mf_only.to_table();
    return 0;
  }

  if (cmd_recommend->parsed()) {
    RunConfig cfg = resolve_config(rec_args);
    DataBundle data = prepare_data_from_artifacts(cfg);
    TrainOutput models = load_models_for_eval(cfg, rec_checkpoint, data);

    const int user = data.dataset.user_index(raw_user);
    if (user < 0) {
      std::cerr << "unknown user " << raw_user << "; nearest known raw ids:";
      auto it = std::lower_bound(data.dataset.user_raw_ids.begin(),
                                 data.dataset.user_raw_ids.end(), raw_user);
      const auto begin = data.dataset.user_raw_ids.begin();
      for (auto p = (it - begin >= 2 ? it - 2 : begin);
           p != data.dataset.user_raw_ids.end() && p - it < 2; ++p)
        std::cerr << ' ' << *p;
      std::cerr << '\n';
      return 2;
    }

    ScorerModel& gen = *models.generator;
    gen.begin_pass(false);
    const int t_eval = data.sessions.last_session();
    std::vector<int> universe =
        unrated_universe(data.index, user, data.sessions.num_movies);
    if (universe.empty()) {
      std::cout << "user " << raw_user
                << " has rated every movie in training; nothing to recommend\n";
      return 0;
    }
    RankedList list = rank_candidates(
        user, universe,
        [&](int u, int m) { return gen.score_s(u, m, t_eval); }, {}, 0);
    const int n = std::min<int>(top_n, static_cast<int>(list.movies.size()));
    for (int r = 0; r < n; ++r) {
      const int m = list.movies[r];
      std::printf("%3d  movie %-8lld  score %.6f\n", r + 1,
                  static_cast<long long>(data.dataset.movie_raw_ids[m]),
                  double(gen.score(user, m, t_eval)));
    }
    return 0;
  }

  if (cmd_sweep_sessions->parsed()) {
    RunConfig cfg = resolve_config(ssweep_args);
    std::ostringstream log;
    const std::string csv =
        sweep_sessions_csv(cfg, parse_int_list(periods_arg), &log);
    fs::create_directories(cfg.out_dir);
    write_text_file(cfg.out_dir + "/sweep_sessions.csv", csv);
    std::cout << csv;
    return 0;
  }

  if (cmd_sweep_candidates->parsed()) {
    RunConfig cfg = resolve_config(csweep_args);
    DataBundle data = prepare_data_from_artifacts(cfg);
    TrainOutput models = load_models_for_eval(cfg, csweep_checkpoint, data);
    const std::string csv = sweep_candidates_csv(
        data, *models.generator, models.mf, cfg, parse_int_list(ns_arg));
    fs::create_directories(cfg.out_dir);
    write_text_file(cfg.out_dir + "/sweep_candidates.csv", csv);
    std::cout << csv;
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const SplitError& e) {
    std::cerr << "split error: " << e.what() << '\n';
    return 2;
  } catch (const TrainingError& e) {
    std::cerr << "training error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
