#include <doctest.h>

#include "lsic/data.hpp"
#include "lsic/synthetic.hpp"

#include <filesystem>
#include <fstream>
#include <set>

using namespace lsic;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
  const std::string path = "/tmp/" + name;
  std::ofstream os(path, std::ios::trunc);
  os << body;
  return path;
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("movielens parser maps raw ids densely") {
  const std::string path = write_temp(
      "lsic_ml.tsv",
      "196\t242\t3\t881250949\n"
      "186\t302\t3\t891717742\n"
      "22\t377\t1\t878887116\n");
  RatingDataset ds = parse_movielens(path);
  CHECK(ds.num_users == 3);
  CHECK(ds.num_movies == 3);
  CHECK(ds.events.size() == 3);
  // dense ids follow ascending raw order
  CHECK(ds.user_raw_ids == std::vector<std::int64_t>{22, 186, 196});
  const int u196 = ds.user_index(196);
  const int m242 = ds.movie_index(242);
  // events sorted by timestamp; the 196/242/3 event is the middle one
  const RatingEvent& e = ds.events[1];
  CHECK(e.user == u196);
  CHECK(e.movie == m242);
  CHECK(e.rating == real(3));
  CHECK(e.timestamp == 881250949);
  std::filesystem::remove(path);
}

TEST_CASE("movielens parser rejects malformed input with a line number") {
  const std::string path = write_temp("lsic_bad.tsv", "a\tb\tc\td\n");
  try {
    parse_movielens(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  const std::string empty = write_temp("lsic_empty.tsv", "");
  CHECK_THROWS_AS(parse_movielens(empty), ParseError);
  const std::string extra =
      write_temp("lsic_extra.tsv", "1\t2\t3\t4\t5\n");
  CHECK_THROWS_AS(parse_movielens(extra), ParseError);
  const std::string badrating = write_temp("lsic_badr.tsv", "1\t2\t9\t4\n");
  CHECK_THROWS_AS(parse_movielens(badrating), ParseError);
  const std::string dup = write_temp("lsic_dup.tsv", "1\t2\t3\t4\n1\t2\t5\t4\n");
  CHECK_THROWS_AS(parse_movielens(dup), ParseError);
  for (const char* n :
       {"lsic_bad.tsv", "lsic_empty.tsv", "lsic_extra.tsv", "lsic_badr.tsv",
        "lsic_dup.tsv"})
    std::filesystem::remove(std::string("/tmp/") + n);
}

TEST_CASE("netflix per-movie format parses dates") {
  const std::string path = write_temp("lsic_nf.txt",
                                      "5:\n"
                                      "100,4,2005-09-06\n"
                                      "200,5,2005-10-01\n"
                                      "9:\n"
                                      "100,1,2005-11-11\n");
  RatingDataset ds = parse_netflix(path);
  CHECK(ds.num_users == 2);
  CHECK(ds.num_movies == 2);
  CHECK(ds.events.size() == 3);
  CHECK(ds.events.front().timestamp == parse_time("2005-09-06"));
  std::filesystem::remove(path);
}

TEST_CASE("parse_time handles dates and epochs") {
  CHECK(parse_time("1998-03-01") == 888710400);
  CHECK(parse_time("888710400") == 888710400);
  CHECK(parse_time("1970-01-01") == 0);
  CHECK_THROWS_AS(parse_time("not-a-date"), ParseError);
}

TEST_CASE("serialization round-trips the dataset exactly") {
  PlantedWorld world = make_planted_world({});
  const std::string path = "/tmp/lsic_roundtrip.tsv";
  write_dataset(world.dataset, path);
  RatingDataset back = parse_movielens(path);
  REQUIRE(back.events.size() == world.dataset.events.size());
  label_feedback(back, LabelScheme::kMovielens);
  for (std::size_t i = 0; i < back.events.size(); ++i) {
    CHECK(back.events[i].user == world.dataset.events[i].user);
    CHECK(back.events[i].movie == world.dataset.events[i].movie);
    CHECK(back.events[i].rating == world.dataset.events[i].rating);
    CHECK(back.events[i].timestamp == world.dataset.events[i].timestamp);
  }
  std::filesystem::remove(path);
}

TEST_CASE("feedback labeling thresholds") {
  RatingDataset ds;
  ds.num_users = ds.num_movies = 1;
  ds.user_raw_ids = {0};
  ds.movie_raw_ids = {0};
  for (int r = 1; r <= 5; ++r)
    ds.events.push_back({0, 0, real(r), r, false});

  LabelCounts nf = label_feedback(ds, LabelScheme::kNetflix);
  CHECK(nf.positives == 1);  // only the 5
  CHECK(ds.events[4].positive);
  CHECK_FALSE(ds.events[3].positive);  // rating 4 negative under netflix

  LabelCounts ml = label_feedback(ds, LabelScheme::kMovielens);
  CHECK(ml.positives == 2);  // 4 and 5
  CHECK(ds.events[3].positive);

  CHECK_THROWS_AS(label_scheme_from_string("imdb"), ConfigError);
}

TEST_CASE("time_split partitions by the boundary and removes cold entities") {
  // 10 events, boundary after the 6th; user 5 and movie 9 only appear late.
  RatingDataset ds;
  ds.num_users = 6;
  ds.num_movies = 10;
  for (int i = 0; i < 6; ++i) ds.user_raw_ids.push_back(i);
  for (int i = 0; i < 10; ++i) ds.movie_raw_ids.push_back(i);
  for (int i = 0; i < 10; ++i) {
    RatingEvent e;
    e.user = (i == 7) ? 5 : i % 4;  // user 5 appears only post-boundary
    e.movie = (i == 8) ? 9 : i % 5; // movie 9 appears only post-boundary
    e.rating = 4;
    e.timestamp = 1000 + i * 100;
    ds.events.push_back(e);
  }
  SplitSpec spec;
  spec.train_end = 1000 + 5 * 100;  // first 6 events
  spec.test_end = 10000;
  spec.validation_fraction = 0.5;

  DataSplit split = time_split(ds, spec, 42);
  CHECK(split.train.size() == 6);
  CHECK(split.removed_cold == 2);
  CHECK(split.validation.size() + split.test.size() == 2);

  // determinism
  DataSplit again = time_split(ds, spec, 42);
  CHECK(again.assignment == split.assignment);

  // disjointness + union (before cold removal) covers everything
  std::set<int> seen;
  for (std::size_t i = 0; i < split.assignment.size(); ++i)
    seen.insert(static_cast<int>(i));
  CHECK(seen.size() == ds.events.size());

  // no leakage
  std::int64_t max_train = 0, min_heldout = INT64_MAX;
  for (const auto& e : split.train) max_train = std::max(max_train, e.timestamp);
  for (const auto& e : split.validation)
    min_heldout = std::min(min_heldout, e.timestamp);
  for (const auto& e : split.test)
    min_heldout = std::min(min_heldout, e.timestamp);
  CHECK(max_train <= min_heldout);
}

TEST_CASE("time_split fails on degenerate boundaries") {
  RatingDataset ds;
  ds.num_users = ds.num_movies = 1;
  ds.user_raw_ids = {0};
  ds.movie_raw_ids = {0};
  ds.events.push_back({0, 0, 4, 100, false});
  SplitSpec spec;
  spec.train_end = 200;  // everything in train, test empty
  spec.test_end = 300;
  CHECK_THROWS_AS(time_split(ds, spec, 1), SplitError);
}

TEST_CASE("sessionize windows and partitions the train events") {
  std::vector<RatingEvent> train;
  const std::int64_t day = 86400;
  train.push_back({0, 0, 4, 1 * day, true});
  train.push_back({0, 1, 3, 11 * day, false});   // 10 days later: same session
  train.push_back({0, 2, 5, 41 * day, true});    // 40 days later: next session
  SessionizedDataset sd = sessionize(train, 1, 3, 30, 1 * day);
  CHECK(sd.session_count == 2);
  CHECK(sd.user_sessions[0][0].size() == 2);
  CHECK(sd.user_sessions[0][1].size() == 1);

  // partition: every train event lands in exactly one user and movie vector
  std::size_t user_total = 0, movie_total = 0;
  for (const auto& per_session : sd.user_sessions)
    for (const auto& s : per_session) user_total += s.size();
  for (const auto& per_session : sd.movie_sessions)
    for (const auto& s : per_session) movie_total += s.size();
  CHECK(user_total == train.size());
  CHECK(movie_total == train.size());

  CHECK_THROWS_AS(sessionize(train, 1, 3, 0, day), ConfigError);
}

TEST_CASE("sessionize reconstructs the planted world losslessly") {
  PlantedWorld world = make_planted_world({});
  DataSplit split = time_split(world.dataset, world.spec, 7);
  SessionizedDataset sd =
      sessionize(split.train, world.dataset.num_users,
                 world.dataset.num_movies, world.spec.session_length_days,
                 world.dataset.start_timestamp());
  // session count covers the train span
  std::int64_t span = 0;
  for (const auto& e : split.train)
    span = std::max(span, e.timestamp - world.dataset.start_timestamp());
  const int expected =
      static_cast<int>(span / (world.spec.session_length_days * 86400)) + 1;
  CHECK(sd.session_count == expected);

  // lossless reconstruction: multiset of (user, movie, rating, session)
  std::multiset<std::tuple<int, int, real, int>> from_sessions, from_events;
  for (int u = 0; u < sd.num_users; ++u)
    for (int t = 0; t < sd.session_count; ++t)
      for (const auto& s : sd.user_sessions[u][t])
        from_sessions.insert({u, s.counterpart, s.rating, t});
  for (const auto& e : split.train)
    from_events.insert(
        {e.user, e.movie, e.rating, sd.session_of(e.timestamp)});
  CHECK(from_sessions == from_events);
}

TEST_CASE("content features load, flag missing movies, reject ragged rows") {
  RatingDataset ds;
  ds.num_users = 1;
  ds.num_movies = 3;
  ds.user_raw_ids = {0};
  ds.movie_raw_ids = {10, 20, 30};
  ds.events.push_back({0, 0, 4, 100, false});

  const std::string good = write_temp("lsic_feat.txt",
                                      "10 1.0 2.0 3.0\n"
                                      "30 0.5 0.5 0.5\n");
  ContentFeatures cf = load_content_features(good, ds);
  CHECK(cf.dim == 3);
  CHECK(cf.has(0));
  CHECK_FALSE(cf.has(1));  // raw 20 missing -> zero vector + flag
  CHECK(cf.missing == std::vector<int>{1});
  CHECK(cf.features(1, 0) == real(0));
  CHECK(cf.features(0, 1) == real(2.0));

  const std::string ragged = write_temp("lsic_feat_bad.txt",
                                        "10 1.0 2.0 3.0\n"
                                        "20 1.0 2.0\n");
  CHECK_THROWS_AS(load_content_features(ragged, ds), ParseError);
  std::filesystem::remove(good);
  std::filesystem::remove(ragged);
}

TEST_CASE("train index collects per-user structures") {
  PlantedWorld world = make_planted_world({});
  DataSplit split = time_split(world.dataset, world.spec, 7);
  SessionizedDataset sd =
      sessionize(split.train, world.dataset.num_users,
                 world.dataset.num_movies, world.spec.session_length_days,
                 world.dataset.start_timestamp());
  TrainIndex ix = build_train_index(sd);
  std::size_t pos = 0, neg = 0;
  for (int u = 0; u < sd.num_users; ++u) {
    pos += ix.user_positives[u].size();
    neg += ix.user_negative_movies[u].size();
    for (int m : ix.user_rated[u]) CHECK(ix.user_has_rated(u, m));
  }
  CHECK(pos + neg == split.train.size());
  CHECK(pos == ix.positives.size());
}

TEST_CASE("surrogate dataset has the expected scale") {
  RatingDataset ds = make_surrogate_ml100k(1);
  CHECK(ds.num_users == 943);
  CHECK(ds.num_movies <= 1682);
  CHECK(ds.num_movies > 1500);
  CHECK(ds.events.size() > 99000);
  CHECK(ds.events.size() <= 100000);
  // deterministic
  RatingDataset ds2 = make_surrogate_ml100k(1);
  CHECK(ds2.events.size() == ds.events.size());
  CHECK(ds2.events[1234].timestamp == ds.events[1234].timestamp);
}

}  // TEST_SUITE
