#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "clover/params.hpp"
#include "clover/rng.hpp"
#include "clover/tape.hpp"

namespace testutil {

// relative error with an absolute guard below magnitude 1
inline double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

// Central finite differences against the analytic gradient for every entry
// of every parameter in the store. `build` must construct the same scalar
// loss from any tape/binder pair. Returns the worst relative error.
inline double max_grad_rel_err(
    clover::ad::ParamStore& store,
    const std::function<clover::ad::NodeId(clover::ad::Tape&, clover::ad::Binder&)>& build,
    double h = 1e-4) {
  using namespace clover;
  store.zero_grads();
  ad::Tape tape;
  ad::Binder binder(tape, store, false);
  ad::NodeId loss = build(tape, binder);
  tape.backward(loss);
  binder.harvest();

  auto eval = [&]() {
    ad::Tape t;
    ad::Binder b(t, store, false);
    return t.value(build(t, b)).a[0];
  };

  double worst = 0.0;
  for (const auto& name : store.names()) {
    Mat& value = store.value(name);
    const Mat& grad = store.grad(name);
    for (size_t i = 0; i < value.size(); ++i) {
      const double orig = value.a[i];
      value.a[i] = orig + h;
      const double fp = eval();
      value.a[i] = orig - h;
      const double fm = eval();
      value.a[i] = orig;
      const double fd = (fp - fm) / (2.0 * h);
      worst = std::max(worst, rel_err(grad.a[i], fd));
    }
  }
  store.zero_grads();
  return worst;
}

inline clover::Mat random_mat(int r, int c, clover::Rng& rng, double lo = -1.0,
                              double hi = 1.0) {
  clover::Mat m(r, c);
  for (auto& x : m.a) x = rng.uniform_in(lo, hi);
  return m;
}

}  // namespace testutil
