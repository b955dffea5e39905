#ifndef LSIC_DATA_HPP_
#define LSIC_DATA_HPP_

#include "lsic/common.hpp"
#include "lsic/rng.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace lsic {

struct RatingEvent {
  int user = 0;   // dense index
  int movie = 0;  // dense index
  real rating = 0;
  std::int64_t timestamp = 0;
  bool positive = false;
};

struct RatingDataset {
  std::vector<RatingEvent> events;  // sorted by (timestamp, user, movie)
  int num_users = 0;
  int num_movies = 0;
  // dense index -> raw external id
  std::vector<std::int64_t> user_raw_ids;
  std::vector<std::int64_t> movie_raw_ids;

  std::int64_t start_timestamp() const {
    return events.empty() ? 0 : events.front().timestamp;
  }
  std::int64_t end_timestamp() const {
    return events.empty() ? 0 : events.back().timestamp;
  }
  int user_index(std::int64_t raw) const;   // -1 if unknown
  int movie_index(std::int64_t raw) const;  // -1 if unknown
};

// MovieLens-100K style: one event per line, "user \t item \t rating \t ts",
// all integer fields. Raw ids are densified in ascending raw-id order.
RatingDataset parse_movielens(const std::string& path);

// Netflix per-movie text format: "<movie_id>:" header lines followed by
// "user,rating,YYYY-MM-DD" lines.
RatingDataset parse_netflix(const std::string& path);

// Round-trip serialization (writes the MovieLens tab format with raw ids).
void write_dataset(const RatingDataset& ds, const std::string& path);
void write_id_map(const std::vector<std::int64_t>& raw_ids,
                  const std::string& path);
std::vector<std::int64_t> read_id_map(const std::string& path);

enum class LabelScheme { kNetflix, kMovielens };
LabelScheme label_scheme_from_string(const std::string& s);
const char* to_string(LabelScheme s);

struct LabelCounts {
  std::int64_t positives = 0;
  std::int64_t negatives = 0;
};
// Netflix: positive iff rating == 5. MovieLens: positive iff rating >= 4.
LabelCounts label_feedback(RatingDataset& ds, LabelScheme scheme);

struct SplitSpec {
  std::int64_t train_end = 0;  // inclusive
  std::int64_t test_end = 0;   // inclusive
  double validation_fraction = 0.5;
  int session_length_days = 30;
  void validate() const;
};

enum class Partition : std::int8_t {
  kTrain = 0,
  kValidation = 1,
  kTest = 2,
  kRemovedCold = 3,
  kDropped = 4,  // beyond test_end
};

struct DataSplit {
  std::vector<RatingEvent> train;
  std::vector<RatingEvent> validation;
  std::vector<RatingEvent> test;
  std::vector<Partition> assignment;  // parallel to the input dataset events
  std::int64_t removed_cold = 0;
  std::int64_t dropped = 0;
};

// Train = timestamp <= train_end; events in (train_end, test_end] are split
// per-event into validation (fraction v) and test with a seeded Rng; users
// and movies absent from train are removed from validation/test.
DataSplit time_split(const RatingDataset& ds, const SplitSpec& spec,
                     std::uint64_t seed);

void write_split_manifest(const DataSplit& split, const std::string& path,
                          const std::string& config_hash);

struct SessionEntry {
  int counterpart = 0;  // movie id in user sessions, user id in movie sessions
  real rating = 0;
  bool positive = false;
};
using SessionVec = std::vector<SessionEntry>;

struct SessionizedDataset {
  int num_users = 0;
  int num_movies = 0;
  int session_count = 0;
  std::int64_t dataset_start = 0;
  int session_length_days = 30;
  // [entity][session] -> sparse rating vector over counterparts
  std::vector<std::vector<SessionVec>> user_sessions;
  std::vector<std::vector<SessionVec>> movie_sessions;

  struct Event {
    int user, movie, session;
    real rating;
    bool positive;
  };
  std::vector<Event> events;

  int session_of(std::int64_t timestamp) const {
    return static_cast<int>((timestamp - dataset_start) /
                            (std::int64_t(session_length_days) * 86400));
  }
  int last_session() const { return session_count - 1; }
};

// Buckets every training event into one session window of
// `session_length_days` days counted from `dataset_start`.
SessionizedDataset sessionize(const std::vector<RatingEvent>& train,
                              int num_users, int num_movies,
                              int session_length_days,
                              std::int64_t dataset_start);

struct ContentFeatures {
  int dim = 0;
  RowMat features;               // num_movies x dim, zero row when missing
  std::vector<int> missing;      // dense movie ids without a feature record
  std::vector<std::uint8_t> present;  // per dense movie id

  bool has(int movie) const { return present[movie] != 0; }
};

// File format: one record per line, raw movie id followed by `dim`
// whitespace-separated reals. Movies without a record get the zero vector.
ContentFeatures load_content_features(const std::string& path,
                                      const RatingDataset& ds);

// Secondary lookup tables derived from a training split; used by the
// pretraining and adversarial phases.
struct TrainIndex {
  struct PositiveRef {
    int movie;
    int session;
  };
  std::vector<std::vector<int>> user_rated;      // sorted train movies per user
  std::vector<std::vector<PositiveRef>> user_positives;
  std::vector<std::vector<int>> user_negative_movies;  // train-negative movies
  std::vector<int> users_with_positives;         // ascending
  // Flat (user, movie, session) positives for batch sampling.
  struct FlatPositive {
    int user, movie, session;
  };
  std::vector<FlatPositive> positives;

  bool user_has_rated(int user, int movie) const;
};

TrainIndex build_train_index(const SessionizedDataset& sd);

struct DatasetStats {
  int users = 0;
  int movies = 0;
  std::int64_t ratings = 0;
  std::int64_t train_ratings = 0;
  std::int64_t validation_ratings = 0;
  std::int64_t test_ratings = 0;
  double matrix_fill_rate = 0;  // observed / (U*M)
  std::string format_table() const;
};

DatasetStats compute_stats(const RatingDataset& ds, const DataSplit* split);

// Parses "YYYY-MM-DD" (UTC midnight) or a plain integer epoch value.
std::int64_t parse_time(const std::string& s);

}  // namespace lsic

#endif  // LSIC_DATA_HPP_
