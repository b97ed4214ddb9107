#include <doctest.h>

#include <cmath>
#include <sstream>

#include "clover/params.hpp"
#include "clover/tape.hpp"
#include "testutil.hpp"

using namespace clover;
using namespace clover::ad;
using testutil::rel_err;

TEST_CASE("abs forward and subgradient at zero") {
  Tape t;
  NodeId x = t.leaf(Mat::scalar(-3.0));
  NodeId y = t.abs(x);
  CHECK(t.value(y).a[0] == 3.0);

  Tape t2;
  NodeId x0 = t2.leaf(Mat::scalar(0.0));
  NodeId l = t2.abs(x0);
  t2.backward(l);
  CHECK(t2.grad(x0).a[0] == 0.0);
}

TEST_CASE("matmul shapes") {
  Tape t;
  NodeId a = t.leaf(Mat::full(2, 3, 1.0));
  NodeId b = t.leaf(Mat::full(3, 1, 2.0));
  NodeId c = t.matmul(a, b);
  CHECK(t.value(c).rows == 2);
  CHECK(t.value(c).cols == 1);
  CHECK(t.value(c).a[0] == doctest::Approx(6.0));

  NodeId bad = t.leaf(Mat::full(2, 3, 1.0));
  CHECK_THROWS_AS((void)t.matmul(a, bad), ShapeError);
}

TEST_CASE("elu value and derivative at -1") {
  Tape t;
  NodeId x = t.leaf(Mat::scalar(-1.0));
  NodeId y = t.elu(x);
  CHECK(t.value(y).a[0] == doctest::Approx(std::exp(-1.0) - 1.0).epsilon(1e-12));
  t.backward(y);
  CHECK(t.grad(x).a[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("backward on identity and sum_all") {
  Tape t;
  NodeId x = t.leaf(Mat::scalar(0.7));
  t.backward(x);
  CHECK(t.grad(x).a[0] == 1.0);

  Tape t2;
  NodeId m = t2.leaf(Mat::full(3, 2, 0.5));
  NodeId s = t2.sum_all(m);
  t2.backward(s);
  for (double g : t2.grad(m).a) CHECK(g == 1.0);
}

TEST_CASE("backward rejects non-scalar loss") {
  Tape t;
  NodeId x = t.leaf(Mat::full(2, 1, 1.0));
  CHECK_THROWS_AS(t.backward(x), ShapeError);
}

TEST_CASE("apply dispatcher rejects unknown kinds") {
  Tape t;
  NodeId x = t.leaf(Mat::scalar(1.0));
  CHECK_THROWS_AS((void)t.apply(static_cast<Op>(250), {x}), UnsupportedOpError);
  CHECK_THROWS_AS((void)t.apply(Op::Add, {x}), ShapeError);  // wrong arity
  CHECK(t.value(t.apply(Op::Tanh, {x})).a[0] == doctest::Approx(std::tanh(1.0)));
}

namespace {

// gradient of x under loss = sum(c .* f(x)) via parameters in a store
double primitive_max_err(const std::function<NodeId(Tape&, NodeId)>& f, int rows,
                         int cols, Rng& rng, double lo = -2.0, double hi = 2.0) {
  ParamStore store;
  Mat& x = store.create("x", rows, cols);
  for (auto& v : x.a) v = rng.uniform_in(lo, hi);
  Mat probe;  // random probe shaped like the op output
  {
    Tape t;
    const Mat& out = t.value(f(t, t.leaf(x, false)));
    probe = testutil::random_mat(out.rows, out.cols, rng);
  }
  auto build = [&](Tape& t, Binder& b) {
    return t.sum_all(t.mul(t.constant(probe), f(t, b("x"))));
  };
  return testutil::max_grad_rel_err(store, build);
}

}  // namespace

TEST_CASE("every primitive matches central finite differences") {
  Rng rng(1234);
  const int reps = 7;  // 7 reps x 5x3 entries x per-op > 100 random points each
  for (int k = 0; k < reps; ++k) {
    CHECK(primitive_max_err([](Tape& t, NodeId x) { return t.relu(x); }, 5, 3, rng,
                            0.01, 2.0) < 1e-4);
    CHECK(primitive_max_err([](Tape& t, NodeId x) { return t.scale(t.relu(x), -1.0); },
                            5, 3, rng, -2.0, -0.01) < 1e-4);
    CHECK(primitive_max_err([](Tape& t, NodeId x) { return t.elu(x); }, 5, 3, rng) <
          1e-4);
    CHECK(primitive_max_err([](Tape& t, NodeId x) { return t.sigmoid(x); }, 5, 3,
                            rng) < 1e-4);
    CHECK(primitive_max_err([](Tape& t, NodeId x) { return t.tanh(x); }, 5, 3, rng) <
          1e-4);
    CHECK(primitive_max_err([](Tape& t, NodeId x) { return t.square(x); }, 5, 3,
                            rng) < 1e-4);
    CHECK(primitive_max_err([](Tape& t, NodeId x) { return t.transpose(x); }, 5, 3,
                            rng) < 1e-4);
    CHECK(primitive_max_err([](Tape& t, NodeId x) { return t.reshape(x, 3, 5); }, 5,
                            3, rng) < 1e-4);
    CHECK(primitive_max_err([](Tape& t, NodeId x) { return t.slice_rows(x, 1, 3); },
                            5, 2, rng) < 1e-4);
    // abs away from the kink
    CHECK(primitive_max_err([](Tape& t, NodeId x) { return t.abs(x); }, 5, 3, rng,
                            0.01, 2.0) < 1e-4);
    CHECK(primitive_max_err([](Tape& t, NodeId x) { return t.scale(t.abs(x), 0.7); },
                            5, 3, rng, -2.0, -0.01) < 1e-4);
  }

  // binary and set ops over store parameters
  ParamStore store;
  Rng r2(99);
  for (auto& v : store.create("a", 4, 3).a) v = r2.uniform_in(-1, 1);
  for (auto& v : store.create("b", 3, 2).a) v = r2.uniform_in(-1, 1);
  for (auto& v : store.create("c", 4, 2).a) v = r2.uniform_in(-1, 1);
  Mat probe = testutil::random_mat(4, 2, r2);
  auto with_probe = [&](Tape& t, NodeId y) {
    return t.sum_all(t.mul(t.constant(probe), y));
  };
  CHECK(testutil::max_grad_rel_err(store, [&](Tape& t, Binder& b) {
          return with_probe(t, t.add(t.matmul(b("a"), b("b")), b("c")));
        }) < 1e-4);
  CHECK(testutil::max_grad_rel_err(store, [&](Tape& t, Binder& b) {
          return with_probe(t, t.sub(t.matmul(b("a"), b("b")), b("c")));
        }) < 1e-4);
  CHECK(testutil::max_grad_rel_err(store, [&](Tape& t, Binder& b) {
          return with_probe(t, t.mul(t.matmul(b("a"), b("b")), b("c")));
        }) < 1e-4);
  CHECK(testutil::max_grad_rel_err(store, [&](Tape& t, Binder& b) {
          return with_probe(t, t.sum_set({b("c"), t.matmul(b("a"), b("b")), b("c")}));
        }) < 1e-4);
  CHECK(testutil::max_grad_rel_err(store, [&](Tape& t, Binder& b) {
          return with_probe(t, t.mean_set({b("c"), t.matmul(b("a"), b("b"))}));
        }) < 1e-4);
  CHECK(testutil::max_grad_rel_err(store, [&](Tape& t, Binder& b) {
          return t.sum_all(t.concat_rows({b("c"), t.matmul(b("a"), b("b"))}));
        }) < 1e-4);
}

TEST_CASE("random five-op composite matches finite differences") {
  Rng rng(777);
  ParamStore store;
  for (auto& v : store.create("x", 3, 3).a) v = rng.uniform_in(-1.5, 1.5);
  for (auto& v : store.create("w", 3, 3).a) v = rng.uniform_in(-1.5, 1.5);
  auto build = [](Tape& t, Binder& b) {
    NodeId h = t.tanh(t.matmul(b("w"), b("x")));          // 1: matmul, 2: tanh
    NodeId s = t.add(h, t.transpose(b("x")));             // 3: transpose, 4: add
    return t.sum_all(t.square(s));                        // 5: square (+ reduction)
  };
  CHECK(testutil::max_grad_rel_err(store, build) < 1e-4);
}

TEST_CASE("fan-out accumulates gradient over both paths") {
  // loss = sum(x) + sum(x .* x): dloss/dx = 1 + 2x
  ParamStore store;
  Rng rng(5);
  Mat& x = store.create("x", 4, 1);
  for (auto& v : x.a) v = rng.uniform_in(-1, 1);
  Tape t;
  Binder b(t, store, false);
  NodeId xv = b("x");
  NodeId loss = t.add(t.sum_all(xv), t.sum_all(t.mul(xv, xv)));
  t.backward(loss);
  b.harvest();
  for (size_t i = 0; i < x.size(); ++i)
    CHECK(rel_err(store.grad("x").a[i], 1.0 + 2.0 * x.a[i]) < 1e-12);
}

TEST_CASE("adam with zero gradients is a no-op on values") {
  ParamStore store;
  Rng rng(3);
  for (auto& v : store.create("w", 3, 3).a) v = rng.uniform_in(-1, 1);
  const Mat before = store.value("w");
  store.adam_step(AdamConfig{});
  for (size_t i = 0; i < before.size(); ++i)
    CHECK(store.value("w").a[i] == before.a[i]);
}

TEST_CASE("adam default learning rate and descent on a scalar quadratic") {
  AdamConfig cfg;
  CHECK(cfg.lr == 5e-4);

  ParamStore store;
  store.create("x", 1, 1).a[0] = 0.0;  // loss = (x - 3)^2
  double prev = 3.0;
  for (int step = 0; step < 500; ++step) {
    Tape t;
    Binder b(t, store, false);
    NodeId loss = t.square(t.sub(b("x"), t.constant_scalar(3.0)));
    t.backward(loss);
    b.harvest();
    store.adam_step(cfg);
    const double dist = std::fabs(store.value("x").a[0] - 3.0);
    CHECK(dist < prev);
    prev = dist;
  }
}

TEST_CASE("target sync copies exactly and stays independent") {
  ParamStore store;
  Rng rng(11);
  for (auto& v : store.create("w", 2, 2).a) v = rng.uniform_in(-1, 1);
  SUBCASE("fresh store target equals initialization") {
    store.sync_target();
    for (size_t i = 0; i < 4; ++i)
      CHECK(store.target("w").a[i] == store.value("w").a[i]);
  }
  store.sync_target();
  const Mat snapshot = store.target("w");
  store.value("w").a[0] += 1.0;
  for (size_t i = 0; i < 4; ++i) CHECK(store.target("w").a[i] == snapshot.a[i]);
}

TEST_CASE("checkpoint round-trip is value-exact") {
  ParamStore store;
  Rng rng(21);
  for (auto& v : store.create("layer.w", 3, 4).a) v = rng.uniform_in(-5, 5);
  for (auto& v : store.create("layer.b", 3, 1).a) v = rng.normal();
  store.value("layer.b").a[0] = 0.1 + 0.2;  // value with no short decimal form
  std::stringstream ss;
  store.save(ss);

  ParamStore loaded;
  loaded.load(ss);
  for (const auto& name : store.names()) {
    REQUIRE(loaded.has(name));
    const Mat& a = store.value(name);
    const Mat& b = loaded.value(name);
    REQUIRE(a.rows == b.rows);
    REQUIRE(a.cols == b.cols);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a.a[i] == b.a[i]);
    // target synced to loaded values
    for (size_t i = 0; i < a.size(); ++i)
      CHECK(loaded.target(name).a[i] == a.a[i]);
  }
}
