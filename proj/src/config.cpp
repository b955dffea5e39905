#include "lsic/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace lsic {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int to_int(const std::string& key, const std::string& v) {
  int out;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("config: '" + key + "' expects an unsigned integer, got '" + v + "'");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: '" + key + "' expects true/false, got '" + v + "'");
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "data.format") data_format = value;
  else if (key == "data.path") data_path = value;
  else if (key == "data.content") content_path = value;
  else if (key == "data.label_scheme") label_scheme = value;
  else if (key == "split.train_end") train_end = value;
  else if (key == "split.test_end") test_end = value;
  else if (key == "split.validation_fraction") validation_fraction = to_double(key, value);
  else if (key == "session.days") session_days = to_int(key, value);
  else if (key == "mf.dim") mf_dim = to_int(key, value);
  else if (key == "mf.lr") mf_lr = to_double(key, value);
  else if (key == "mf.epochs") mf_epochs = to_int(key, value);
  else if (key == "mf.batch") mf_batch = to_int(key, value);
  else if (key == "rnn.hidden") hidden = to_int(key, value);
  else if (key == "rnn.input_dim") input_dim = to_int(key, value);
  else if (key == "rnn.attn_hidden") attn_hidden = to_int(key, value);
  else if (key == "mixture") mixture = value;
  else if (key == "v2.identity_map") v2_identity_map = to_bool(key, value);
  else if (key == "attention.pool_users") attention_pool_users = to_int(key, value);
  else if (key == "attention.pool_movies") attention_pool_movies = to_int(key, value);
  else if (key == "train.factors") train_factors = to_bool(key, value);
  else if (key == "content.enabled") content_enabled = to_bool(key, value);
  else if (key == "pretrain.lr") pretrain_lr = to_double(key, value);
  else if (key == "pretrain.epochs") pretrain_epochs = to_int(key, value);
  else if (key == "pretrain.steps") pretrain_steps = to_int(key, value);
  else if (key == "pretrain.batch") pretrain_batch = to_int(key, value);
  else if (key == "adv.lr_g") adv_lr_g = to_double(key, value);
  else if (key == "adv.lr_d") adv_lr_d = to_double(key, value);
  else if (key == "adv.epochs") adv_epochs = to_int(key, value);
  else if (key == "adv.g_steps") g_steps = to_int(key, value);
  else if (key == "adv.d_steps") d_steps = to_int(key, value);
  else if (key == "adv.batch") adv_batch = to_int(key, value);
  else if (key == "adv.samples") num_samples = to_int(key, value);
  else if (key == "adv.margin") margin = to_double(key, value);
  else if (key == "adv.reward_floor") reward_floor = to_double(key, value);
  else if (key == "adv.d_log_epsilon") d_log_epsilon = to_double(key, value);
  else if (key == "opt.clip") clip = to_double(key, value);
  else if (key == "opt.l2") l2 = to_double(key, value);
  else if (key == "candidates.n") candidate_n = to_int(key, value);
  else if (key == "candidates.mode") candidate_mode = value;
  else if (key == "eval.validation_users") validation_user_cap = to_int(key, value);
  else if (key == "seed") seed = to_u64(key, value);
  else if (key == "out_dir") out_dir = value;
  else throw ConfigError("config: unknown key '" + key + "'");
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.resize(hash_pos);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

void RunConfig::validate() const {
  if (data_format != "movielens" && data_format != "netflix" &&
      data_format != "surrogate")
    throw ConfigError("config: data.format must be movielens, netflix or surrogate");
  if (candidate_mode != "rerank" && candidate_mode != "full")
    throw ConfigError("config: candidates.mode must be rerank or full");
  if (mixture != "v1" && mixture != "v2" && mixture != "v3" && mixture != "v4")
    throw ConfigError("config: mixture must be one of v1..v4");
  if (label_scheme != "movielens" && label_scheme != "netflix")
    throw ConfigError("config: data.label_scheme must be movielens or netflix");
  if (!(validation_fraction > 0 && validation_fraction < 1))
    throw ConfigError("config: split.validation_fraction must be in (0,1)");
  if (session_days < 1) throw ConfigError("config: session.days must be >= 1");
  if (candidate_n < 1) throw ConfigError("config: candidates.n must be >= 1");
  if (num_samples < 1) throw ConfigError("config: adv.samples must be >= 1");
}

std::string RunConfig::echo() const {
  std::map<std::string, std::string> kv;
  kv["data.format"] = data_format;
  kv["data.path"] = data_path;
  kv["data.content"] = content_path;
  kv["data.label_scheme"] = label_scheme;
  kv["split.train_end"] = train_end;
  kv["split.test_end"] = test_end;
  kv["split.validation_fraction"] = fmt_double(validation_fraction);
  kv["session.days"] = std::to_string(session_days);
  kv["mf.dim"] = std::to_string(mf_dim);
  kv["mf.lr"] = fmt_double(mf_lr);
  kv["mf.epochs"] = std::to_string(mf_epochs);
  kv["mf.batch"] = std::to_string(mf_batch);
  kv["rnn.hidden"] = std::to_string(hidden);
  kv["rnn.input_dim"] = std::to_string(input_dim);
  kv["rnn.attn_hidden"] = std::to_string(attn_hidden);
  kv["mixture"] = mixture;
  kv["v2.identity_map"] = v2_identity_map ? "true" : "false";
  kv["attention.pool_users"] = std::to_string(attention_pool_users);
  kv["attention.pool_movies"] = std::to_string(attention_pool_movies);
  kv["train.factors"] = train_factors ? "true" : "false";
  kv["content.enabled"] = content_enabled ? "true" : "false";
  kv["pretrain.lr"] = fmt_double(pretrain_lr);
  kv["pretrain.epochs"] = std::to_string(pretrain_epochs);
  kv["pretrain.steps"] = std::to_string(pretrain_steps);
  kv["pretrain.batch"] = std::to_string(pretrain_batch);
  kv["adv.lr_g"] = fmt_double(adv_lr_g);
  kv["adv.lr_d"] = fmt_double(adv_lr_d);
  kv["adv.epochs"] = std::to_string(adv_epochs);
  kv["adv.g_steps"] = std::to_string(g_steps);
  kv["adv.d_steps"] = std::to_string(d_steps);
  kv["adv.batch"] = std::to_string(adv_batch);
  kv["adv.samples"] = std::to_string(num_samples);
  kv["adv.margin"] = fmt_double(margin);
  kv["adv.reward_floor"] = fmt_double(reward_floor);
  kv["adv.d_log_epsilon"] = fmt_double(d_log_epsilon);
  kv["opt.clip"] = fmt_double(clip);
  kv["opt.l2"] = fmt_double(l2);
  kv["candidates.n"] = std::to_string(candidate_n);
  kv["candidates.mode"] = candidate_mode;
  kv["eval.validation_users"] = std::to_string(validation_user_cap);
  kv["seed"] = std::to_string(seed);
  kv["out_dir"] = out_dir;

  std::ostringstream os;
  for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
  return os.str();
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunConfig::hash() const { return fnv1a_hex(echo()); }

}  // namespace lsic
