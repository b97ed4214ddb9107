#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "clover/mat.hpp"
#include "clover/rng.hpp"
#include "clover/tape.hpp"

namespace clover::ad {

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Named parameter tensors: online set, target set, gradient accumulators and
// Adam moments. Iteration order is the (sorted) name order, so every
// whole-store operation is deterministic.
class ParamStore {
 public:
  Mat& create(const std::string& name, int rows, int cols);
  // weight init: uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], fan_in = cols
  Mat& create_weight(const std::string& name, int rows, int cols, Rng& rng);

  bool has(const std::string& name) const { return entries_.count(name) > 0; }
  Mat& value(const std::string& name);
  const Mat& value(const std::string& name) const;
  Mat& target(const std::string& name);
  Mat& grad(const std::string& name);
  std::vector<std::string> names() const;

  void zero_grads();
  double grad_norm() const;
  void clip_grads(double max_norm);
  void adam_step(const AdamConfig& cfg);
  void sync_target();  // target := exact copy of online
  int64_t step_count() const { return t_; }

  // Text container: "params <n>" then per parameter a "name rows cols" line
  // followed by one hexfloat line per row. Round-trips are value-exact.
  void save(std::ostream& os) const;
  void load(std::istream& is);  // resets moments and step count; target := online

 private:
  struct Entry {
    Mat value, target, grad, m, v;
  };
  std::map<std::string, Entry> entries_;
  int64_t t_ = 0;
  Entry& at(const std::string& name);
};

// Binds store parameters into a tape as cached leaf nodes. The online binder
// creates differentiable leaves and can harvest their gradients back into the
// store; the target binder creates constant leaves (TD targets carry no
// gradient).
class Binder {
 public:
  Binder(Tape& tape, ParamStore& store, bool use_target = false)
      : tape_(&tape), store_(&store), use_target_(use_target) {}

  NodeId operator()(const std::string& name);
  void harvest();

 private:
  Tape* tape_;
  ParamStore* store_;
  bool use_target_;
  std::map<std::string, NodeId> bound_;
};

}  // namespace clover::ad
