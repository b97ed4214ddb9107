#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace clover {

// Contract-violation errors carry the taxonomy in the type name.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnsupportedOpError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense row-major double matrix. Vectors are n x 1 columns by convention.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  static Mat zeros(int r, int c) { return Mat(r, c); }
  static Mat full(int r, int c, double v) {
    Mat m(r, c);
    for (auto& x : m.a) x = v;
    return m;
  }
  static Mat scalar(double v) {
    Mat m(1, 1);
    m.a[0] = v;
    return m;
  }
  static Mat colvec(const std::vector<double>& v) {
    Mat m(static_cast<int>(v.size()), 1);
    m.a = v;
    return m;
  }

  double& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
  size_t size() const { return a.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
  std::string shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
  }
};

// C = A * B, Eigen-backed.
Mat matmul(const Mat& a, const Mat& b);
// C += A * B^T and C += A^T * B, used by the matmul backward rule.
void add_matmul_nt(Mat& c, const Mat& a, const Mat& b);
void add_matmul_tn(Mat& c, const Mat& a, const Mat& b);

}  // namespace clover
