#include "lsic/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace lsic {

namespace {
constexpr std::int64_t kDay = 86400;

int weighted_pick(const std::vector<double>& cumulative, Rng& rng) {
  const double r = rng.uniform() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
  int idx = static_cast<int>(it - cumulative.begin());
  if (idx >= static_cast<int>(cumulative.size()))
    idx = static_cast<int>(cumulative.size()) - 1;
  return idx;
}
}  // namespace

PlantedWorld make_planted_world(const PlantedWorldConfig& cfg) {
  Rng rng(cfg.seed);
  const int C = cfg.num_clusters;
  const std::int64_t session_len = std::int64_t(cfg.session_length_days) * kDay;
  const std::int64_t base = kDay;  // keep timestamps strictly positive

  std::vector<double> movie_weight(cfg.num_movies, 1.0);
  for (int j = 0; j < cfg.num_movies; ++j)
    if (j % 4 == 3) movie_weight[j] = cfg.rare_movie_weight;
  std::vector<double> cum(cfg.num_movies);
  std::partial_sum(movie_weight.begin(), movie_weight.end(), cum.begin());

  std::vector<RatingEvent> events;
  for (int t = 0; t < cfg.num_sessions; ++t) {
    for (int u = 0; u < cfg.num_users; ++u) {
      int user_cluster = u % C;
      if (cfg.temporal_drift && t >= cfg.num_sessions / 2)
        user_cluster = (user_cluster + 1) % C;

      std::vector<int> rated;
      while (static_cast<int>(rated.size()) <
             std::min(cfg.ratings_per_user_per_session, cfg.num_movies)) {
        const int j = weighted_pick(cum, rng);
        if (std::find(rated.begin(), rated.end(), j) != rated.end()) continue;
        rated.push_back(j);
      }
      for (std::size_t k = 0; k < rated.size(); ++k) {
        const int j = rated[k];
        bool liked = (j % C) == user_cluster;
        if (rng.uniform() < cfg.noise) liked = !liked;
        real rating;
        if (liked)
          rating = rng.uniform() < 0.7 ? real(5) : real(4);
        else
          rating = real(1 + rng.uniform_int(3));  // 1..3
        RatingEvent e;
        e.user = u;
        e.movie = j;
        e.rating = rating;
        e.timestamp = base + std::int64_t(t) * session_len +
                      std::int64_t(k) * 3600 + u * 7 + 1;
        events.push_back(e);
      }
    }
  }

  PlantedWorld world;
  world.dataset.events = std::move(events);
  world.dataset.num_users = cfg.num_users;
  world.dataset.num_movies = cfg.num_movies;
  world.dataset.user_raw_ids.resize(cfg.num_users);
  world.dataset.movie_raw_ids.resize(cfg.num_movies);
  for (int u = 0; u < cfg.num_users; ++u) world.dataset.user_raw_ids[u] = u;
  for (int j = 0; j < cfg.num_movies; ++j) world.dataset.movie_raw_ids[j] = j;
  std::sort(world.dataset.events.begin(), world.dataset.events.end(),
            [](const RatingEvent& a, const RatingEvent& b) {
              if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
              if (a.user != b.user) return a.user < b.user;
              return a.movie < b.movie;
            });
  label_feedback(world.dataset, LabelScheme::kMovielens);

  world.spec.train_end = base + std::int64_t(cfg.num_sessions - 1) * session_len - 1;
  world.spec.test_end = base + std::int64_t(cfg.num_sessions) * session_len;
  world.spec.session_length_days = cfg.session_length_days;
  world.spec.validation_fraction = 0.5;

  if (cfg.content_features) {
    world.has_content = true;
    world.content.dim = cfg.content_dim;
    world.content.features.setZero(cfg.num_movies, cfg.content_dim);
    world.content.present.assign(cfg.num_movies, 1);
    for (int j = 0; j < cfg.num_movies; ++j) {
      for (int k = 0; k < cfg.content_dim; ++k) {
        real v = real(cfg.content_noise) * rng.gaussian();
        if (k % C == j % C) v += real(1);  // cluster signature
        world.content.features(j, k) = v;
      }
    }
  }
  return world;
}

RatingDataset make_surrogate_ml100k(std::uint64_t seed) {
  Rng rng(seed);
  const int U = 943;
  const int M = 1682;
  const int target_events = 100000;
  const int latent = 4;
  // Span chosen to mirror a ~7-month log starting 1997-09-20.
  const std::int64_t start = 874713600;
  const std::int64_t span = 215 * kDay;

  // Low-rank tastes plus a drift component that rotates over the span.
  RowMat a(U, latent), b(M, latent), bdrift(M, latent);
  for (int u = 0; u < U; ++u)
    for (int k = 0; k < latent; ++k) a(u, k) = rng.gaussian();
  for (int j = 0; j < M; ++j)
    for (int k = 0; k < latent; ++k) {
      b(j, k) = rng.gaussian();
      bdrift(j, k) = rng.gaussian();
    }
  Vec movie_bias(M);
  for (int j = 0; j < M; ++j) movie_bias[j] = real(0.4) * rng.gaussian();

  // Zipf-ish popularity over a shuffled rank assignment.
  std::vector<int> rank(M);
  std::iota(rank.begin(), rank.end(), 0);
  rng.shuffle(rank);
  std::vector<double> weight(M);
  for (int j = 0; j < M; ++j) weight[j] = 1.0 / std::pow(rank[j] + 12.0, 0.85);
  std::vector<double> cum(M);
  std::partial_sum(weight.begin(), weight.end(), cum.begin());

  // User activity: heavy-tailed, floor of 25 events each.
  std::vector<int> activity(U);
  double total = 0;
  for (int u = 0; u < U; ++u) {
    const double x = std::exp(0.9 * rng.gaussian());
    activity[u] = 25 + static_cast<int>(60.0 * x);
    total += activity[u];
  }
  const double scale = static_cast<double>(target_events) / total;
  int assigned = 0;
  for (int u = 0; u < U; ++u) {
    activity[u] = std::max(25, static_cast<int>(activity[u] * scale));
    assigned += activity[u];
  }
  for (int u = 0; assigned < target_events; u = (u + 1) % U) {
    ++activity[u];
    ++assigned;
  }
  for (int u = 0; assigned > target_events; u = (u + 1) % U) {
    if (activity[u] > 25) {
      --activity[u];
      --assigned;
    }
  }

  std::vector<RatingEvent> events;
  events.reserve(target_events);
  std::vector<std::vector<std::int64_t>> seen(U);
  for (int u = 0; u < U; ++u) {
    // Each user is active inside a personal sub-window of the span.
    const double w0 = rng.uniform() * 0.55;
    const double w1 = std::min(1.0, w0 + 0.3 + rng.uniform() * 0.35);
    int emitted = 0;
    int guard = 0;
    while (emitted < activity[u] && guard < activity[u] * 30) {
      ++guard;
      const int j = weighted_pick(cum, rng);
      const double frac = w0 + (w1 - w0) * rng.uniform();
      const std::int64_t ts =
          start + static_cast<std::int64_t>(frac * static_cast<double>(span)) +
          rng.uniform_int(86400);
      const std::int64_t key = std::int64_t(j) * 1000000000LL + ts;
      if (std::find(seen[u].begin(), seen[u].end(), key) != seen[u].end())
        continue;
      seen[u].push_back(key);

      const double drift = 2.0 * frac - 1.0;  // -1 .. 1 across the span
      double s = 0;
      for (int k = 0; k < latent; ++k)
        s += a(u, k) * (b(j, k) + drift * bdrift(j, k));
      s = 0.55 * s + movie_bias[j] + 0.7 * rng.gaussian();
      int stars = static_cast<int>(std::lround(3.4 + s));
      stars = std::clamp(stars, 1, 5);

      RatingEvent e;
      e.user = u;
      e.movie = j;
      e.rating = static_cast<real>(stars);
      e.timestamp = ts;
      events.push_back(e);
      ++emitted;
    }
  }

  RatingDataset ds;
  ds.events = std::move(events);
  ds.num_users = U;
  ds.num_movies = M;
  ds.user_raw_ids.resize(U);
  ds.movie_raw_ids.resize(M);
  for (int u = 0; u < U; ++u) ds.user_raw_ids[u] = u + 1;
  for (int j = 0; j < M; ++j) ds.movie_raw_ids[j] = j + 1;
  std::sort(ds.events.begin(), ds.events.end(),
            [](const RatingEvent& x, const RatingEvent& y) {
              if (x.timestamp != y.timestamp) return x.timestamp < y.timestamp;
              if (x.user != y.user) return x.user < y.user;
              return x.movie < y.movie;
            });
  // Deduplicate any residual (user, movie, timestamp) collisions.
  ds.events.erase(std::unique(ds.events.begin(), ds.events.end(),
                              [](const RatingEvent& x, const RatingEvent& y) {
                                return x.timestamp == y.timestamp &&
                                       x.user == y.user && x.movie == y.movie;
                              }),
                  ds.events.end());
  label_feedback(ds, LabelScheme::kMovielens);
  return ds;
}

void write_content_file(const RowMat& features, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write content file: " + path);
  os.precision(10);
  for (Eigen::Index j = 0; j < features.rows(); ++j) {
    os << j;
    for (Eigen::Index k = 0; k < features.cols(); ++k)
      os << ' ' << features(j, k);
    os << '\n';
  }
}

}  // namespace lsic
