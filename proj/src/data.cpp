#include "lsic/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace lsic {

namespace {

bool parse_i64(std::string_view s, std::int64_t& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

struct RawEvent {
  std::int64_t user, movie;
  real rating;
  std::int64_t ts;
};

RatingDataset densify(std::vector<RawEvent> raw, const std::string& origin) {
  if (raw.empty()) throw ParseError(origin + ": no rating events");

  std::set<std::int64_t> users, movies;
  for (const auto& e : raw) {
    users.insert(e.user);
    movies.insert(e.movie);
  }
  RatingDataset ds;
  ds.user_raw_ids.assign(users.begin(), users.end());
  ds.movie_raw_ids.assign(movies.begin(), movies.end());
  ds.num_users = static_cast<int>(ds.user_raw_ids.size());
  ds.num_movies = static_cast<int>(ds.movie_raw_ids.size());

  std::unordered_map<std::int64_t, int> umap, mmap;
  for (int i = 0; i < ds.num_users; ++i) umap[ds.user_raw_ids[i]] = i;
  for (int j = 0; j < ds.num_movies; ++j) mmap[ds.movie_raw_ids[j]] = j;

  ds.events.reserve(raw.size());
  for (const auto& e : raw) {
    RatingEvent ev;
    ev.user = umap[e.user];
    ev.movie = mmap[e.movie];
    ev.rating = e.rating;
    ev.timestamp = e.ts;
    ds.events.push_back(ev);
  }
  std::sort(ds.events.begin(), ds.events.end(),
            [](const RatingEvent& a, const RatingEvent& b) {
              if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
              if (a.user != b.user) return a.user < b.user;
              return a.movie < b.movie;
            });
  for (std::size_t i = 1; i < ds.events.size(); ++i) {
    const auto& a = ds.events[i - 1];
    const auto& b = ds.events[i];
    if (a.timestamp == b.timestamp && a.user == b.user && a.movie == b.movie)
      throw ParseError(origin + ": duplicate (user, movie, timestamp) triple");
  }
  return ds;
}

}  // namespace

int RatingDataset::user_index(std::int64_t raw) const {
  auto it = std::lower_bound(user_raw_ids.begin(), user_raw_ids.end(), raw);
  if (it == user_raw_ids.end() || *it != raw) return -1;
  return static_cast<int>(it - user_raw_ids.begin());
}

int RatingDataset::movie_index(std::int64_t raw) const {
  auto it = std::lower_bound(movie_raw_ids.begin(), movie_raw_ids.end(), raw);
  if (it == movie_raw_ids.end() || *it != raw) return -1;
  return static_cast<int>(it - movie_raw_ids.begin());
}

RatingDataset parse_movielens(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open ratings file: " + path);

  std::vector<RawEvent> raw;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::int64_t fields[4];
    std::size_t pos = 0;
    for (int f = 0; f < 4; ++f) {
      std::size_t next = line.find('\t', pos);
      if (f < 3 && next == std::string::npos)
        throw ParseError(path + ": line " + std::to_string(lineno) +
                         ": expected 4 tab-separated fields");
      std::string_view field(line.data() + pos,
                             (next == std::string::npos ? line.size() : next) -
                                 pos);
      if (!parse_i64(field, fields[f]))
        throw ParseError(path + ": line " + std::to_string(lineno) +
                         ": non-integer field '" + std::string(field) + "'");
      if (f == 3 && next != std::string::npos)
        throw ParseError(path + ": line " + std::to_string(lineno) +
                         ": too many fields");
      pos = (next == std::string::npos) ? line.size() : next + 1;
    }
    if (fields[2] < 1 || fields[2] > 5)
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": rating outside {1..5}");
    if (fields[3] <= 0)
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": non-positive timestamp");
    raw.push_back({fields[0], fields[1], static_cast<real>(fields[2]), fields[3]});
  }
  return densify(std::move(raw), path);
}

RatingDataset parse_netflix(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open ratings file: " + path);

  std::vector<RawEvent> raw;
  std::string line;
  std::int64_t lineno = 0;
  std::int64_t current_movie = -1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.back() == ':') {
      std::int64_t id;
      if (!parse_i64(std::string_view(line.data(), line.size() - 1), id))
        throw ParseError(path + ": line " + std::to_string(lineno) +
                         ": malformed movie header");
      current_movie = id;
      continue;
    }
    if (current_movie < 0)
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": rating line before any movie header");
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = (c1 == std::string::npos) ? std::string::npos
                                                     : line.find(',', c1 + 1);
    if (c2 == std::string::npos)
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": expected 'user,rating,date'");
    std::int64_t user, rating;
    if (!parse_i64(std::string_view(line.data(), c1), user) ||
        !parse_i64(std::string_view(line.data() + c1 + 1, c2 - c1 - 1), rating))
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": non-integer user or rating");
    if (rating < 1 || rating > 5)
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": rating outside {1..5}");
    const std::int64_t ts = parse_time(line.substr(c2 + 1));
    raw.push_back({user, current_movie, static_cast<real>(rating), ts});
  }
  return densify(std::move(raw), path);
}

void write_dataset(const RatingDataset& ds, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write dataset: " + path);
  for (const auto& e : ds.events) {
    os << ds.user_raw_ids[e.user] << '\t' << ds.movie_raw_ids[e.movie] << '\t'
       << static_cast<std::int64_t>(e.rating) << '\t' << e.timestamp << '\n';
  }
  if (!os) throw IoError("failed writing dataset: " + path);
}

void write_id_map(const std::vector<std::int64_t>& raw_ids,
                  const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write id map: " + path);
  for (std::size_t i = 0; i < raw_ids.size(); ++i)
    os << i << '\t' << raw_ids[i] << '\n';
}

std::vector<std::int64_t> read_id_map(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open id map: " + path);
  std::vector<std::int64_t> out;
  std::int64_t dense, raw;
  while (is >> dense >> raw) {
    if (dense != static_cast<std::int64_t>(out.size()))
      throw ParseError(path + ": id map not densely ordered");
    out.push_back(raw);
  }
  return out;
}

LabelScheme label_scheme_from_string(const std::string& s) {
  if (s == "netflix") return LabelScheme::kNetflix;
  if (s == "movielens") return LabelScheme::kMovielens;
  throw ConfigError("unknown label scheme '" + s +
                    "' (expected netflix or movielens)");
}

const char* to_string(LabelScheme s) {
  return s == LabelScheme::kNetflix ? "netflix" : "movielens";
}

LabelCounts label_feedback(RatingDataset& ds, LabelScheme scheme) {
  LabelCounts counts;
  for (auto& e : ds.events) {
    e.positive = (scheme == LabelScheme::kNetflix) ? (e.rating == real(5))
                                                   : (e.rating >= real(4));
    if (e.positive)
      ++counts.positives;
    else
      ++counts.negatives;
  }
  return counts;
}

void SplitSpec::validate() const {
  if (!(train_end < test_end))
    throw ConfigError("split: train_end must be < test_end");
  if (!(validation_fraction > 0 && validation_fraction < 1))
    throw ConfigError("split: validation_fraction must be in (0,1)");
  if (session_length_days < 1)
    throw ConfigError("split: session_length_days must be >= 1");
}

DataSplit time_split(const RatingDataset& ds, const SplitSpec& spec,
                     std::uint64_t seed) {
  spec.validate();
  if (ds.events.empty()) throw SplitError("time_split: empty dataset");

  DataSplit split;
  split.assignment.resize(ds.events.size());
  Rng rng(seed);

  std::vector<std::uint8_t> in_train_user(ds.num_users, 0),
      in_train_movie(ds.num_movies, 0);
  for (std::size_t i = 0; i < ds.events.size(); ++i) {
    const auto& e = ds.events[i];
    if (e.timestamp <= spec.train_end) {
      split.assignment[i] = Partition::kTrain;
      split.train.push_back(e);
      in_train_user[e.user] = 1;
      in_train_movie[e.movie] = 1;
    }
  }

  for (std::size_t i = 0; i < ds.events.size(); ++i) {
    const auto& e = ds.events[i];
    if (e.timestamp <= spec.train_end) continue;
    if (e.timestamp > spec.test_end) {
      split.assignment[i] = Partition::kDropped;
      ++split.dropped;
      continue;
    }
    // Draw first so cold-entity removal does not shift later assignments.
    const bool val = rng.uniform() < spec.validation_fraction;
    if (!in_train_user[e.user] || !in_train_movie[e.movie]) {
      split.assignment[i] = Partition::kRemovedCold;
      ++split.removed_cold;
      continue;
    }
    if (val) {
      split.assignment[i] = Partition::kValidation;
      split.validation.push_back(e);
    } else {
      split.assignment[i] = Partition::kTest;
      split.test.push_back(e);
    }
  }

  if (split.train.empty()) throw SplitError("time_split: empty train partition");
  if (split.test.empty()) throw SplitError("time_split: empty test partition");
  return split;
}

void write_split_manifest(const DataSplit& split, const std::string& path,
                          const std::string& config_hash) {
  static const char* names[] = {"train", "validation", "test", "removed_cold",
                                "dropped"};
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write split manifest: " + path);
  os << "# config_hash=" << config_hash << '\n';
  for (std::size_t i = 0; i < split.assignment.size(); ++i)
    os << i << '\t' << names[static_cast<int>(split.assignment[i])] << '\n';
}

SessionizedDataset sessionize(const std::vector<RatingEvent>& train,
                              int num_users, int num_movies,
                              int session_length_days,
                              std::int64_t dataset_start) {
  if (session_length_days < 1)
    throw ConfigError("sessionize: session_length_days must be >= 1");

  SessionizedDataset sd;
  sd.num_users = num_users;
  sd.num_movies = num_movies;
  sd.session_length_days = session_length_days;
  sd.dataset_start = dataset_start;

  int max_session = -1;
  for (const auto& e : train)
    max_session = std::max(max_session, sd.session_of(e.timestamp));
  sd.session_count = max_session + 1;

  sd.user_sessions.assign(num_users, std::vector<SessionVec>(sd.session_count));
  sd.movie_sessions.assign(num_movies,
                           std::vector<SessionVec>(sd.session_count));
  sd.events.reserve(train.size());
  for (const auto& e : train) {
    const int t = sd.session_of(e.timestamp);
    sd.user_sessions[e.user][t].push_back({e.movie, e.rating, e.positive});
    sd.movie_sessions[e.movie][t].push_back({e.user, e.rating, e.positive});
    sd.events.push_back({e.user, e.movie, t, e.rating, e.positive});
  }
  return sd;
}

ContentFeatures load_content_features(const std::string& path,
                                      const RatingDataset& ds) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open content feature file: " + path);

  ContentFeatures cf;
  cf.present.assign(ds.num_movies, 0);

  std::vector<std::pair<int, std::vector<real>>> records;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::int64_t raw_id;
    if (!(ls >> raw_id))
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": missing movie id");
    std::vector<real> vals;
    real v;
    while (ls >> v) vals.push_back(v);
    if (vals.empty())
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": no feature values");
    for (real x : vals)
      if (!std::isfinite(x))
        throw ParseError(path + ": line " + std::to_string(lineno) +
                         ": non-finite feature value");
    if (cf.dim == 0) cf.dim = static_cast<int>(vals.size());
    if (static_cast<int>(vals.size()) != cf.dim)
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": feature length " + std::to_string(vals.size()) +
                       " differs from " + std::to_string(cf.dim));
    const int dense = ds.movie_index(raw_id);
    if (dense < 0) continue;  // feature for a movie not in the dataset
    records.emplace_back(dense, std::move(vals));
  }
  if (cf.dim == 0) throw ParseError(path + ": empty content feature file");

  cf.features.setZero(ds.num_movies, cf.dim);
  for (auto& [dense, vals] : records) {
    for (int k = 0; k < cf.dim; ++k) cf.features(dense, k) = vals[k];
    cf.present[dense] = 1;
  }
  for (int j = 0; j < ds.num_movies; ++j)
    if (!cf.present[j]) cf.missing.push_back(j);
  return cf;
}

bool TrainIndex::user_has_rated(int user, int movie) const {
  const auto& v = user_rated[user];
  return std::binary_search(v.begin(), v.end(), movie);
}

TrainIndex build_train_index(const SessionizedDataset& sd) {
  TrainIndex ix;
  ix.user_rated.resize(sd.num_users);
  ix.user_positives.resize(sd.num_users);
  ix.user_negative_movies.resize(sd.num_users);
  for (const auto& e : sd.events) {
    ix.user_rated[e.user].push_back(e.movie);
    if (e.positive) {
      ix.user_positives[e.user].push_back({e.movie, e.session});
      ix.positives.push_back({e.user, e.movie, e.session});
    } else {
      ix.user_negative_movies[e.user].push_back(e.movie);
    }
  }
  for (auto& v : ix.user_rated) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  for (int u = 0; u < sd.num_users; ++u)
    if (!ix.user_positives[u].empty()) ix.users_with_positives.push_back(u);
  return ix;
}

DatasetStats compute_stats(const RatingDataset& ds, const DataSplit* split) {
  DatasetStats st;
  st.users = ds.num_users;
  st.movies = ds.num_movies;
  st.ratings = static_cast<std::int64_t>(ds.events.size());
  if (split) {
    st.train_ratings = static_cast<std::int64_t>(split->train.size());
    st.validation_ratings = static_cast<std::int64_t>(split->validation.size());
    st.test_ratings = static_cast<std::int64_t>(split->test.size());
  }
  if (ds.num_users > 0 && ds.num_movies > 0)
    st.matrix_fill_rate = static_cast<double>(st.ratings) /
                          (static_cast<double>(ds.num_users) * ds.num_movies);
  return st;
}

std::string DatasetStats::format_table() const {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "users              %d\n"
                "movies             %d\n"
                "ratings            %lld\n"
                "train ratings      %lld\n"
                "validation ratings %lld\n"
                "test ratings       %lld\n"
                "matrix fill rate   %.6f\n",
                users, movies, static_cast<long long>(ratings),
                static_cast<long long>(train_ratings),
                static_cast<long long>(validation_ratings),
                static_cast<long long>(test_ratings), matrix_fill_rate);
  return buf;
}

std::int64_t parse_time(const std::string& s) {
  // Plain integer epoch seconds.
  std::int64_t v;
  if (parse_i64(s, v)) return v;
  // YYYY-MM-DD at UTC midnight (days-from-civil, no timezone tables).
  int y, m, d;
  if (std::sscanf(s.c_str(), "%d-%d-%d", &y, &m, &d) != 3)
    throw ParseError("cannot parse time '" + s +
                     "' (expected epoch seconds or YYYY-MM-DD)");
  if (m < 1 || m > 12 || d < 1 || d > 31)
    throw ParseError("invalid calendar date '" + s + "'");
  const int yy = y - (m <= 2);
  const int era = (yy >= 0 ? yy : yy - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(yy - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  const std::int64_t days =
      static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) -
      719468;
  return days * 86400;
}

}  // namespace lsic
