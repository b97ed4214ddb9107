#include "clover/tape.hpp"

#include <Eigen/Core>
#include <cmath>

namespace clover {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const EMat>;
using MMap = Eigen::Map<EMat>;

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols != b.rows)
    throw ShapeError("matmul: " + a.shape_str() + " * " + b.shape_str());
  Mat c(a.rows, b.cols);
  MMap(c.a.data(), c.rows, c.cols).noalias() =
      CMap(a.a.data(), a.rows, a.cols) * CMap(b.a.data(), b.rows, b.cols);
  return c;
}

void add_matmul_nt(Mat& c, const Mat& a, const Mat& b) {
  MMap(c.a.data(), c.rows, c.cols).noalias() +=
      CMap(a.a.data(), a.rows, a.cols) * CMap(b.a.data(), b.rows, b.cols).transpose();
}

void add_matmul_tn(Mat& c, const Mat& a, const Mat& b) {
  MMap(c.a.data(), c.rows, c.cols).noalias() +=
      CMap(a.a.data(), a.rows, a.cols).transpose() * CMap(b.a.data(), b.rows, b.cols);
}

}  // namespace clover

namespace clover::ad {

NodeId Tape::push(Node n) {
  n.grad = Mat(n.value.rows, n.value.cols);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size()) - 1;
}

void Tape::check(NodeId a) const {
  if (a < 0 || a >= static_cast<NodeId>(nodes_.size()))
    throw ContractError("tape: node id out of range");
}

NodeId Tape::leaf(Mat v, bool requires_grad) {
  Node n;
  n.value = std::move(v);
  n.op = Op::Leaf;
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

NodeId Tape::unary(Op op, NodeId a, Mat value) {
  check(a);
  Node n;
  n.value = std::move(value);
  n.op = op;
  n.parents = {a};
  n.requires_grad = nodes_[a].requires_grad;
  return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  check(a);
  check(b);
  Node n;
  n.value = clover::matmul(nodes_[a].value, nodes_[b].value);
  n.op = Op::MatMul;
  n.parents = {a, b};
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  check(a);
  check(b);
  const Mat& va = nodes_[a].value;
  const Mat& vb = nodes_[b].value;
  if (!va.same_shape(vb))
    throw ShapeError("add: " + va.shape_str() + " vs " + vb.shape_str());
  Mat v = va;
  for (size_t i = 0; i < v.size(); ++i) v.a[i] += vb.a[i];
  Node n;
  n.value = std::move(v);
  n.op = Op::Add;
  n.parents = {a, b};
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
  check(a);
  check(b);
  const Mat& va = nodes_[a].value;
  const Mat& vb = nodes_[b].value;
  if (!va.same_shape(vb))
    throw ShapeError("sub: " + va.shape_str() + " vs " + vb.shape_str());
  Mat v = va;
  for (size_t i = 0; i < v.size(); ++i) v.a[i] -= vb.a[i];
  Node n;
  n.value = std::move(v);
  n.op = Op::Sub;
  n.parents = {a, b};
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
  check(a);
  check(b);
  const Mat& va = nodes_[a].value;
  const Mat& vb = nodes_[b].value;
  if (!va.same_shape(vb))
    throw ShapeError("mul: " + va.shape_str() + " vs " + vb.shape_str());
  Mat v = va;
  for (size_t i = 0; i < v.size(); ++i) v.a[i] *= vb.a[i];
  Node n;
  n.value = std::move(v);
  n.op = Op::Mul;
  n.parents = {a, b};
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double s) {
  check(a);
  Mat v = nodes_[a].value;
  for (auto& x : v.a) x *= s;
  NodeId id = unary(Op::Scale, a, std::move(v));
  nodes_[id].scalar = s;
  return id;
}

NodeId Tape::concat_rows(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: empty input list");
  int cols = nodes_[parts[0]].value.cols;
  int rows = 0;
  for (NodeId p : parts) {
    check(p);
    if (nodes_[p].value.cols != cols)
      throw ShapeError("concat_rows: column mismatch");
    rows += nodes_[p].value.rows;
  }
  Mat v(rows, cols);
  int r = 0;
  for (NodeId p : parts) {
    const Mat& vp = nodes_[p].value;
    std::copy(vp.a.begin(), vp.a.end(), v.a.begin() + static_cast<size_t>(r) * cols);
    r += vp.rows;
  }
  Node n;
  n.value = std::move(v);
  n.op = Op::ConcatRows;
  n.parents = parts;
  for (NodeId p : parts) n.requires_grad = n.requires_grad || nodes_[p].requires_grad;
  return push(std::move(n));
}

NodeId Tape::slice_rows(NodeId a, int row0, int nrows) {
  check(a);
  const Mat& va = nodes_[a].value;
  if (row0 < 0 || nrows < 0 || row0 + nrows > va.rows)
    throw ShapeError("slice_rows: range out of bounds");
  Mat v(nrows, va.cols);
  std::copy(va.a.begin() + static_cast<size_t>(row0) * va.cols,
            va.a.begin() + static_cast<size_t>(row0 + nrows) * va.cols, v.a.begin());
  NodeId id = unary(Op::SliceRows, a, std::move(v));
  nodes_[id].row0 = row0;
  return id;
}

NodeId Tape::relu(NodeId a) {
  Mat v = nodes_[a].value;
  for (auto& x : v.a) x = x > 0.0 ? x : 0.0;
  return unary(Op::Relu, a, std::move(v));
}

NodeId Tape::elu(NodeId a) {
  Mat v = nodes_[a].value;
  for (auto& x : v.a) x = x > 0.0 ? x : std::expm1(x);
  return unary(Op::Elu, a, std::move(v));
}

NodeId Tape::sigmoid(NodeId a) {
  Mat v = nodes_[a].value;
  for (auto& x : v.a) x = 1.0 / (1.0 + std::exp(-x));
  return unary(Op::Sigmoid, a, std::move(v));
}

NodeId Tape::tanh(NodeId a) {
  Mat v = nodes_[a].value;
  for (auto& x : v.a) x = std::tanh(x);
  return unary(Op::Tanh, a, std::move(v));
}

NodeId Tape::abs(NodeId a) {
  Mat v = nodes_[a].value;
  for (auto& x : v.a) x = std::fabs(x);
  return unary(Op::Abs, a, std::move(v));
}

NodeId Tape::sum_all(NodeId a) {
  double s = 0.0;
  for (double x : nodes_[a].value.a) s += x;
  return unary(Op::SumAll, a, Mat::scalar(s));
}

NodeId Tape::sum_set(const std::vector<NodeId>& xs) {
  if (xs.empty()) throw ShapeError("sum_set: empty input list");
  Mat v = nodes_[xs[0]].value;
  for (size_t k = 1; k < xs.size(); ++k) {
    check(xs[k]);
    const Mat& vk = nodes_[xs[k]].value;
    if (!vk.same_shape(v)) throw ShapeError("sum_set: shape mismatch");
    for (size_t i = 0; i < v.size(); ++i) v.a[i] += vk.a[i];
  }
  Node n;
  n.value = std::move(v);
  n.op = Op::SumSet;
  n.parents = xs;
  for (NodeId p : xs) n.requires_grad = n.requires_grad || nodes_[p].requires_grad;
  return push(std::move(n));
}

NodeId Tape::mean_set(const std::vector<NodeId>& xs) {
  if (xs.empty()) throw ShapeError("mean_set: empty input list");
  Mat v = nodes_[xs[0]].value;
  for (size_t k = 1; k < xs.size(); ++k) {
    check(xs[k]);
    const Mat& vk = nodes_[xs[k]].value;
    if (!vk.same_shape(v)) throw ShapeError("mean_set: shape mismatch");
    for (size_t i = 0; i < v.size(); ++i) v.a[i] += vk.a[i];
  }
  const double inv = 1.0 / static_cast<double>(xs.size());
  for (auto& x : v.a) x *= inv;
  Node n;
  n.value = std::move(v);
  n.op = Op::MeanSet;
  n.parents = xs;
  n.scalar = inv;
  for (NodeId p : xs) n.requires_grad = n.requires_grad || nodes_[p].requires_grad;
  return push(std::move(n));
}

NodeId Tape::square(NodeId a) {
  Mat v = nodes_[a].value;
  for (auto& x : v.a) x *= x;
  return unary(Op::Square, a, std::move(v));
}

NodeId Tape::transpose(NodeId a) {
  const Mat& va = nodes_[a].value;
  Mat v(va.cols, va.rows);
  for (int r = 0; r < va.rows; ++r)
    for (int c = 0; c < va.cols; ++c) v.at(c, r) = va.at(r, c);
  return unary(Op::Transpose, a, std::move(v));
}

NodeId Tape::reshape(NodeId a, int rows, int cols) {
  const Mat& va = nodes_[a].value;
  if (static_cast<size_t>(rows) * cols != va.size())
    throw ShapeError("reshape: element count mismatch");
  Mat v(rows, cols);
  v.a = va.a;
  return unary(Op::Reshape, a, std::move(v));
}

NodeId Tape::apply(Op kind, const std::vector<NodeId>& inputs) {
  auto need = [&](size_t k) {
    if (inputs.size() != k) throw ShapeError("apply: wrong input count");
  };
  switch (kind) {
    case Op::MatMul: need(2); return matmul(inputs[0], inputs[1]);
    case Op::Add: need(2); return add(inputs[0], inputs[1]);
    case Op::Sub: need(2); return sub(inputs[0], inputs[1]);
    case Op::Mul: need(2); return mul(inputs[0], inputs[1]);
    case Op::ConcatRows: return concat_rows(inputs);
    case Op::Relu: need(1); return relu(inputs[0]);
    case Op::Elu: need(1); return elu(inputs[0]);
    case Op::Sigmoid: need(1); return sigmoid(inputs[0]);
    case Op::Tanh: need(1); return tanh(inputs[0]);
    case Op::Abs: need(1); return abs(inputs[0]);
    case Op::SumAll: need(1); return sum_all(inputs[0]);
    case Op::SumSet: return sum_set(inputs);
    case Op::MeanSet: return mean_set(inputs);
    case Op::Square: need(1); return square(inputs[0]);
    case Op::Transpose: need(1); return transpose(inputs[0]);
    default:
      throw UnsupportedOpError("apply: unsupported primitive kind");
  }
}

void Tape::backward(NodeId loss) {
  check(loss);
  Node& top = nodes_[loss];
  if (top.value.rows != 1 || top.value.cols != 1)
    throw ShapeError("backward: loss must be 1x1, got " + top.value.shape_str());
  top.grad.a[0] += 1.0;
  top.touched = true;

  for (NodeId i = loss; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.touched || !n.requires_grad) continue;
    const Mat& g = n.grad;
    auto touch = [&](NodeId p) -> Mat* {
      Node& pn = nodes_[p];
      if (!pn.requires_grad) return nullptr;
      pn.touched = true;
      return &pn.grad;
    };
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::MatMul: {
        const Mat& a = nodes_[n.parents[0]].value;
        const Mat& b = nodes_[n.parents[1]].value;
        if (Mat* ga = touch(n.parents[0])) add_matmul_nt(*ga, g, b);
        if (Mat* gb = touch(n.parents[1])) add_matmul_tn(*gb, a, g);
        break;
      }
      case Op::Add:
        for (int k = 0; k < 2; ++k)
          if (Mat* gp = touch(n.parents[k]))
            for (size_t j = 0; j < g.size(); ++j) gp->a[j] += g.a[j];
        break;
      case Op::Sub: {
        if (Mat* gp = touch(n.parents[0]))
          for (size_t j = 0; j < g.size(); ++j) gp->a[j] += g.a[j];
        if (Mat* gp = touch(n.parents[1]))
          for (size_t j = 0; j < g.size(); ++j) gp->a[j] -= g.a[j];
        break;
      }
      case Op::Mul: {
        const Mat& a = nodes_[n.parents[0]].value;
        const Mat& b = nodes_[n.parents[1]].value;
        if (Mat* gp = touch(n.parents[0]))
          for (size_t j = 0; j < g.size(); ++j) gp->a[j] += g.a[j] * b.a[j];
        if (Mat* gp = touch(n.parents[1]))
          for (size_t j = 0; j < g.size(); ++j) gp->a[j] += g.a[j] * a.a[j];
        break;
      }
      case Op::Scale:
        if (Mat* gp = touch(n.parents[0]))
          for (size_t j = 0; j < g.size(); ++j) gp->a[j] += g.a[j] * n.scalar;
        break;
      case Op::ConcatRows: {
        size_t off = 0;
        for (NodeId p : n.parents) {
          const size_t cnt = nodes_[p].value.size();
          if (Mat* gp = touch(p))
            for (size_t j = 0; j < cnt; ++j) gp->a[j] += g.a[off + j];
          off += cnt;
        }
        break;
      }
      case Op::SliceRows: {
        if (Mat* gp = touch(n.parents[0])) {
          const size_t off = static_cast<size_t>(n.row0) * g.cols;
          for (size_t j = 0; j < g.size(); ++j) gp->a[off + j] += g.a[j];
        }
        break;
      }
      case Op::Relu: {
        const Mat& x = nodes_[n.parents[0]].value;
        if (Mat* gp = touch(n.parents[0]))
          for (size_t j = 0; j < g.size(); ++j)
            if (x.a[j] > 0.0) gp->a[j] += g.a[j];
        break;
      }
      case Op::Elu: {
        const Mat& x = nodes_[n.parents[0]].value;
        if (Mat* gp = touch(n.parents[0]))
          for (size_t j = 0; j < g.size(); ++j)
            gp->a[j] += g.a[j] * (x.a[j] > 0.0 ? 1.0 : std::exp(x.a[j]));
        break;
      }
      case Op::Sigmoid: {
        const Mat& y = n.value;
        if (Mat* gp = touch(n.parents[0]))
          for (size_t j = 0; j < g.size(); ++j)
            gp->a[j] += g.a[j] * y.a[j] * (1.0 - y.a[j]);
        break;
      }
      case Op::Tanh: {
        const Mat& y = n.value;
        if (Mat* gp = touch(n.parents[0]))
          for (size_t j = 0; j < g.size(); ++j)
            gp->a[j] += g.a[j] * (1.0 - y.a[j] * y.a[j]);
        break;
      }
      case Op::Abs: {
        // subgradient at 0 is defined as 0
        const Mat& x = nodes_[n.parents[0]].value;
        if (Mat* gp = touch(n.parents[0]))
          for (size_t j = 0; j < g.size(); ++j) {
            if (x.a[j] > 0.0)
              gp->a[j] += g.a[j];
            else if (x.a[j] < 0.0)
              gp->a[j] -= g.a[j];
          }
        break;
      }
      case Op::SumAll: {
        if (Mat* gp = touch(n.parents[0]))
          for (size_t j = 0; j < gp->size(); ++j) gp->a[j] += g.a[0];
        break;
      }
      case Op::SumSet:
        for (NodeId p : n.parents)
          if (Mat* gp = touch(p))
            for (size_t j = 0; j < g.size(); ++j) gp->a[j] += g.a[j];
        break;
      case Op::MeanSet:
        for (NodeId p : n.parents)
          if (Mat* gp = touch(p))
            for (size_t j = 0; j < g.size(); ++j) gp->a[j] += g.a[j] * n.scalar;
        break;
      case Op::Square: {
        const Mat& x = nodes_[n.parents[0]].value;
        if (Mat* gp = touch(n.parents[0]))
          for (size_t j = 0; j < g.size(); ++j) gp->a[j] += g.a[j] * 2.0 * x.a[j];
        break;
      }
      case Op::Transpose: {
        if (Mat* gp = touch(n.parents[0])) {
          for (int r = 0; r < g.rows; ++r)
            for (int c = 0; c < g.cols; ++c) gp->at(c, r) += g.at(r, c);
        }
        break;
      }
      case Op::Reshape: {
        if (Mat* gp = touch(n.parents[0]))
          for (size_t j = 0; j < g.size(); ++j) gp->a[j] += g.a[j];
        break;
      }
    }
  }
}

}  // namespace clover::ad
