#include "clover/params.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace clover::ad {

ParamStore::Entry& ParamStore::at(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractError("unknown parameter: " + name);
  return it->second;
}

Mat& ParamStore::create(const std::string& name, int rows, int cols) {
  if (entries_.count(name)) throw ContractError("duplicate parameter: " + name);
  Entry e;
  e.value = Mat(rows, cols);
  e.target = Mat(rows, cols);
  e.grad = Mat(rows, cols);
  e.m = Mat(rows, cols);
  e.v = Mat(rows, cols);
  return entries_.emplace(name, std::move(e)).first->second.value;
}

Mat& ParamStore::create_weight(const std::string& name, int rows, int cols, Rng& rng) {
  Mat& w = create(name, rows, cols);
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  for (auto& x : w.a) x = rng.uniform_in(-bound, bound);
  return w;
}

Mat& ParamStore::value(const std::string& name) { return at(name).value; }
const Mat& ParamStore::value(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractError("unknown parameter: " + name);
  return it->second.value;
}
Mat& ParamStore::target(const std::string& name) { return at(name).target; }
Mat& ParamStore::grad(const std::string& name) { return at(name).grad; }

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [k, v] : entries_) out.push_back(k);
  return out;
}

void ParamStore::zero_grads() {
  for (auto& [k, e] : entries_)
    for (auto& x : e.grad.a) x = 0.0;
}

double ParamStore::grad_norm() const {
  double s = 0.0;
  for (const auto& [k, e] : entries_)
    for (double x : e.grad.a) s += x * x;
  return std::sqrt(s);
}

void ParamStore::clip_grads(double max_norm) {
  const double n = grad_norm();
  if (n <= max_norm || n == 0.0) return;
  const double f = max_norm / n;
  for (auto& [k, e] : entries_)
    for (auto& x : e.grad.a) x *= f;
}

void ParamStore::adam_step(const AdamConfig& cfg) {
  t_ += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t_));
  for (auto& [k, e] : entries_) {
    for (size_t i = 0; i < e.value.size(); ++i) {
      const double g = e.grad.a[i];
      e.m.a[i] = cfg.beta1 * e.m.a[i] + (1.0 - cfg.beta1) * g;
      e.v.a[i] = cfg.beta2 * e.v.a[i] + (1.0 - cfg.beta2) * g * g;
      const double mhat = e.m.a[i] / bc1;
      const double vhat = e.v.a[i] / bc2;
      e.value.a[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
  zero_grads();
}

void ParamStore::sync_target() {
  for (auto& [k, e] : entries_) e.target = e.value;
}

void ParamStore::save(std::ostream& os) const {
  os << "params " << entries_.size() << "\n";
  char buf[64];
  for (const auto& [name, e] : entries_) {
    os << name << " " << e.value.rows << " " << e.value.cols << "\n";
    for (int r = 0; r < e.value.rows; ++r) {
      for (int c = 0; c < e.value.cols; ++c) {
        std::snprintf(buf, sizeof(buf), "%a", e.value.at(r, c));
        os << buf << (c + 1 == e.value.cols ? "" : " ");
      }
      os << "\n";
    }
  }
}

void ParamStore::load(std::istream& is) {
  std::string tok;
  size_t n = 0;
  if (!(is >> tok >> n) || tok != "params")
    throw ConfigError("checkpoint: expected 'params <count>'");
  for (size_t i = 0; i < n; ++i) {
    std::string name;
    int rows = 0, cols = 0;
    if (!(is >> name >> rows >> cols))
      throw ConfigError("checkpoint: bad parameter header");
    if (!entries_.count(name)) create(name, rows, cols);
    Entry& e = at(name);
    if (e.value.rows != rows || e.value.cols != cols)
      throw ConfigError("checkpoint: shape mismatch for " + name);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        if (!(is >> tok)) throw ConfigError("checkpoint: truncated values");
        e.value.at(r, c) = std::strtod(tok.c_str(), nullptr);
      }
    for (auto& x : e.m.a) x = 0.0;
    for (auto& x : e.v.a) x = 0.0;
    for (auto& x : e.grad.a) x = 0.0;
  }
  t_ = 0;
  sync_target();
}

NodeId Binder::operator()(const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  NodeId id;
  if (use_target_)
    id = tape_->leaf(store_->target(name), false);
  else
    id = tape_->leaf(store_->value(name), true);
  bound_.emplace(name, id);
  return id;
}

void Binder::harvest() {
  if (use_target_) return;
  for (const auto& [name, id] : bound_) {
    const Mat& g = tape_->grad(id);
    Mat& acc = store_->grad(name);
    for (size_t i = 0; i < g.size(); ++i) acc.a[i] += g.a[i];
  }
}

}  // namespace clover::ad
