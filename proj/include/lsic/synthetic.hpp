#ifndef LSIC_SYNTHETIC_HPP_
#define LSIC_SYNTHETIC_HPP_

#include "lsic/data.hpp"

namespace lsic {

// Small controllable worlds with planted cluster preferences, optional
// temporal drift and optional content features correlated with the planted
// structure. Used by the verification suites and for demo runs without real
// rating logs.
struct PlantedWorldConfig {
  int num_users = 10;
  int num_movies = 20;
  int num_sessions = 6;   // last session forms the held-out interval
  int num_clusters = 2;
  int ratings_per_user_per_session = 5;
  int session_length_days = 30;
  double noise = 0.02;          // probability of flipping like/dislike
  bool temporal_drift = false;  // preferences rotate one cluster mid-way
  bool content_features = false;
  int content_dim = 8;
  double content_noise = 0.05;
  // Movies with (id % 4 == 3) are sampled into sessions with this relative
  // weight; < 1 plants sparsely-rated movies whose main signal is content.
  double rare_movie_weight = 1.0;
  std::uint64_t seed = 1;
};

struct PlantedWorld {
  RatingDataset dataset;  // labeled with the movielens scheme
  SplitSpec spec;         // train = all but the last session
  ContentFeatures content;
  bool has_content = false;
};

PlantedWorld make_planted_world(const PlantedWorldConfig& cfg);

// Desk-scale surrogate with MovieLens-100K-like marginals: 943 users,
// 1682 movies, 100000 ratings over a ~7 month span, skewed movie popularity
// and user activity, low-rank preferences with temporal drift.
RatingDataset make_surrogate_ml100k(std::uint64_t seed);

void write_content_file(const RowMat& features, const std::string& path);

}  // namespace lsic

#endif  // LSIC_SYNTHETIC_HPP_
