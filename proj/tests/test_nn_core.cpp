#include <doctest.h>

#include "lsic/checkpoint.hpp"
#include "lsic/gradcheck.hpp"
#include "lsic/optimizer.hpp"

#include <cstdio>
#include <filesystem>

using namespace lsic;

TEST_SUITE("nn-core") {

TEST_CASE("init_uniform stays in range and is seed-deterministic") {
  Rng a(7), b(7);
  ParamTensor t1 = init_uniform("t", {2, 2}, real(-0.05), real(0.05), a);
  ParamTensor t2 = init_uniform("t", {2, 2}, real(-0.05), real(0.05), b);
  REQUIRE(t1.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(t1.values[i] >= real(-0.05));
    CHECK(t1.values[i] < real(0.05));
    CHECK(t1.values[i] == t2.values[i]);  // bitwise
    CHECK(t1.grad[i] == real(0));
  }
}

TEST_CASE("init_uniform rejects bad arguments") {
  Rng rng(1);
  CHECK_THROWS(init_uniform("t", {}, real(-1), real(1), rng));
  CHECK_THROWS(init_uniform("t", {2}, real(0.1), real(0.1), rng));
}

TEST_CASE("sgd_step clips the combined update") {
  ParamSet ps;
  ParamTensor* t = ps.add("w", {1});
  OptimizerConfig cfg;
  cfg.learning_rate = real(0.1);
  cfg.clip_range = real(0.2);
  cfg.l2_lambda = 0;

  t->values[0] = 0;
  t->grad[0] = 1;  // clip binds: update = -0.1 * 0.2
  sgd_step(ps, cfg);
  CHECK(t->values[0] == doctest::Approx(-0.02).epsilon(1e-12));
  CHECK(t->grad[0] == real(0));  // grads zeroed

  t->values[0] = real(1);
  t->grad[0] = 0;
  sgd_step(ps, cfg);
  CHECK(t->values[0] == real(1));  // zero gradient, zero decay

  cfg.l2_lambda = real(0.05);
  t->values[0] = real(1);
  t->grad[0] = 0;
  sgd_step(ps, cfg);
  CHECK(t->values[0] == doctest::Approx(0.995).epsilon(1e-12));
}

TEST_CASE("sgd_step update magnitude never exceeds lr*clip") {
  Rng rng(3);
  ParamSet ps;
  ParamTensor* t = ps.add("w", {64});
  fill_uniform(*t, real(-1), real(1), rng);
  for (int i = 0; i < 64; ++i) t->grad[i] = real(100) * rng.gaussian();
  Eigen::Array<real, Eigen::Dynamic, 1> before = t->values;
  OptimizerConfig cfg;
  cfg.learning_rate = real(0.01);
  cfg.clip_range = real(0.2);
  cfg.l2_lambda = real(0.05);
  sgd_step(ps, cfg);
  const real bound = cfg.learning_rate * cfg.clip_range + real(1e-15);
  for (int i = 0; i < 64; ++i)
    CHECK(std::abs(t->values[i] - before[i]) <= bound);
}

TEST_CASE("sgd_step aborts on non-finite gradients, naming the tensor") {
  ParamSet ps;
  ParamTensor* t = ps.add("culprit", {2});
  t->grad[0] = std::numeric_limits<real>::quiet_NaN();
  OptimizerConfig cfg;
  try {
    sgd_step(ps, cfg);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find("culprit") != std::string::npos);
  }
}

TEST_CASE("finite_diff_check validates an exact quadratic gradient") {
  ParamSet ps;
  ParamTensor* x = ps.add("x", {3});
  x->values[0] = 3;
  x->values[1] = -1;
  x->values[2] = 0.5;
  auto f = [&](bool with_grads) -> real {
    real loss = x->values.square().sum();
    if (with_grads) x->grad = 2 * x->values;
    return loss;
  };
  Rng rng(11);
  GradCheckReport rep = finite_diff_check(f, ps, real(1e-5), rng, 3);
  CHECK(rep.max_rel_error < 1e-6);
  CHECK(rep.coords_checked == 3);
}

TEST_CASE("finite_diff_check reports a deliberately wrong gradient") {
  ParamSet ps;
  ParamTensor* x = ps.add("x", {1});
  x->values[0] = 3;
  auto f = [&](bool with_grads) -> real {
    if (with_grads) x->grad[0] = 2 * 2 * x->values[0];  // off by 2x
    return x->values[0] * x->values[0];
  };
  Rng rng(11);
  GradCheckReport rep = finite_diff_check(f, ps, real(1e-5), rng, 1);
  CHECK(rep.max_rel_error == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(rep.worst_tensor == "x");
}

TEST_CASE("finite_diff_check rejects non-deterministic routines") {
  ParamSet ps;
  ps.add("x", {1});
  int calls = 0;
  auto f = [&](bool) -> real { return real(calls++); };
  Rng rng(1);
  CHECK_THROWS(finite_diff_check(f, ps, real(1e-5), rng, 1));
}

TEST_CASE("finite_diff_check validates epsilon bounds") {
  ParamSet ps;
  ps.add("x", {1});
  auto f = [&](bool) -> real { return 0; };
  Rng rng(1);
  CHECK_THROWS(finite_diff_check(f, ps, real(1e-2), rng, 1));
  CHECK_THROWS(finite_diff_check(f, ps, real(1e-8), rng, 1));
}

TEST_CASE("rng streams are reproducible and restorable") {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());

  const std::string saved = a.state();
  std::vector<real> expect;
  for (int i = 0; i < 10; ++i) expect.push_back(a.uniform());
  Rng c(0);
  c.restore(saved);
  for (int i = 0; i < 10; ++i) CHECK(c.uniform() == expect[i]);

  Rng d(5);
  std::vector<int> seen(5, 0);
  for (int i = 0; i < 5000; ++i) ++seen[d.uniform_int(5)];
  for (int k = 0; k < 5; ++k) CHECK(seen[k] > 800);
}

TEST_CASE("checkpoint container round-trips bit-exactly") {
  ParamSet ps;
  ParamTensor* a = ps.add("layer.W", {3, 4});
  ParamTensor* b = ps.add("layer.b", {3});
  Rng rng(17);
  fill_uniform(*a, real(-1), real(1), rng);
  fill_uniform(*b, real(-1), real(1), rng);

  Checkpoint ck;
  ck.put_set("m.", ps);
  ck.strings["rng_state"] = rng.state();
  ck.counters["epoch"] = 12;

  const std::string path = "/tmp/lsic_test_ckpt.bin";
  ck.save(path);
  Checkpoint loaded = Checkpoint::load(path);
  CHECK(loaded.counters.at("epoch") == 12);
  CHECK(loaded.strings.at("rng_state") == rng.state());

  ParamSet ps2;
  ParamTensor* a2 = ps2.add("layer.W", {3, 4});
  ParamTensor* b2 = ps2.add("layer.b", {3});
  loaded.fill_set("m.", ps2);
  for (int i = 0; i < a->size(); ++i) CHECK(a2->values[i] == a->values[i]);
  for (int i = 0; i < b->size(); ++i) CHECK(b2->values[i] == b->values[i]);

  ParamSet ps3;
  ps3.add("layer.W", {4, 3});
  CHECK_THROWS(loaded.fill("m.layer.W", *ps3.find("layer.W")));
  std::filesystem::remove(path);
}

}  // TEST_SUITE
