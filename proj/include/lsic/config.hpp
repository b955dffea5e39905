#ifndef LSIC_CONFIG_HPP_
#define LSIC_CONFIG_HPP_

#include "lsic/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lsic {

// The resolved run configuration. Every knob has a default; unknown keys are
// rejected so a typo cannot silently fall back.
struct RunConfig {
  // data
  std::string data_format = "movielens";  // movielens | netflix | surrogate
  std::string data_path;
  std::string content_path;
  std::string label_scheme = "movielens";  // movielens | netflix
  std::string train_end = "1998-03-01";
  std::string test_end = "1998-05-01";
  double validation_fraction = 0.5;
  int session_days = 30;
  // matrix factorization pretraining
  int mf_dim = 5;
  double mf_lr = 0.01;
  int mf_epochs = 200;
  int mf_batch = 256;
  // session model / scorer
  int hidden = 10;
  int input_dim = 15;
  int attn_hidden = 8;
  std::string mixture = "v4";
  bool v2_identity_map = false;
  int attention_pool_users = 0;
  int attention_pool_movies = 0;
  bool train_factors = false;
  bool content_enabled = true;
  // pairwise pretraining
  double pretrain_lr = 0.001;
  int pretrain_epochs = 4;
  int pretrain_steps = 48;
  int pretrain_batch = 128;
  // adversarial phase
  double adv_lr_g = 1e-4;
  double adv_lr_d = 1e-4;
  int adv_epochs = 30;
  int g_steps = 4;
  int d_steps = 4;
  int adv_batch = 128;
  int num_samples = 64;
  double margin = 0.2;
  double reward_floor = 1e-8;
  double d_log_epsilon = 0.1;
  // shared optimizer
  double clip = 0.2;
  double l2 = 0.05;
  // candidates & evaluation
  int candidate_n = 100;
  std::string candidate_mode = "rerank";  // rerank | full
  int validation_user_cap = 256;
  // run
  std::uint64_t seed = 42;
  std::string out_dir = "out";

  void set(const std::string& key, const std::string& value);
  void load_file(const std::string& path);
  void validate() const;

  // Canonical "key = value" listing of every field, sorted by key.
  std::string echo() const;
  // FNV-1a hash of the echo; embedded in every output artifact.
  std::string hash() const;
};

std::string fnv1a_hex(const std::string& data);

}  // namespace lsic

#endif  // LSIC_CONFIG_HPP_
