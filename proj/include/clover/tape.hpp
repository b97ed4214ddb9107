#pragma once

#include <vector>

#include "clover/mat.hpp"

namespace clover::ad {

enum class Op {
  Leaf,
  MatMul,
  Add,
  Sub,
  Mul,        // elementwise
  Scale,      // by a compile-time constant scalar
  ConcatRows,
  SliceRows,
  Relu,
  Elu,        // alpha = 1
  Sigmoid,
  Tanh,
  Abs,
  SumAll,
  SumSet,     // elementwise sum of k same-shape inputs
  MeanSet,    // elementwise mean of k same-shape inputs
  Square,
  Transpose,
  Reshape,
};

using NodeId = int;

struct Node {
  Mat value;
  Mat grad;
  Op op = Op::Leaf;
  std::vector<NodeId> parents;
  double scalar = 0.0;  // Scale factor
  int row0 = 0;         // SliceRows offset
  bool requires_grad = false;
  bool touched = false;
};

// Reverse-mode tape over dense matrices. Nodes are created in topological
// order (parents strictly precede children); one backward() per tape.
class Tape {
 public:
  NodeId leaf(Mat v, bool requires_grad = true);
  NodeId constant(Mat v) { return leaf(std::move(v), false); }
  NodeId constant_scalar(double x) { return constant(Mat::scalar(x)); }

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId a, double s);
  NodeId concat_rows(const std::vector<NodeId>& parts);
  NodeId slice_rows(NodeId a, int row0, int nrows);
  NodeId relu(NodeId a);
  NodeId elu(NodeId a);
  NodeId sigmoid(NodeId a);
  NodeId tanh(NodeId a);
  NodeId abs(NodeId a);
  NodeId sum_all(NodeId a);
  NodeId sum_set(const std::vector<NodeId>& xs);
  NodeId mean_set(const std::vector<NodeId>& xs);
  NodeId square(NodeId a);
  NodeId transpose(NodeId a);
  NodeId reshape(NodeId a, int rows, int cols);

  // Generic dispatcher covering the argument-free primitives; throws
  // UnsupportedOpError for kinds it cannot build.
  NodeId apply(Op kind, const std::vector<NodeId>& inputs);

  // Accumulates d(loss)/d(node) into every reachable node that requires
  // grad. loss must be 1x1.
  void backward(NodeId loss);

  const Mat& value(NodeId id) const { return nodes_[id].value; }
  const Mat& grad(NodeId id) const { return nodes_[id].grad; }
  const Node& node(NodeId id) const { return nodes_[id]; }
  size_t size() const { return nodes_.size(); }

 private:
  std::vector<Node> nodes_;
  NodeId push(Node n);
  NodeId unary(Op op, NodeId a, Mat value);
  void check(NodeId a) const;
};

}  // namespace clover::ad
