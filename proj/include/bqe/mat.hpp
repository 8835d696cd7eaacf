// SPDX-License-Identifier: Apache-2.0

#ifndef BQE_MAT_HPP
#define BQE_MAT_HPP

#include <cstdint>
#include <vector>

namespace bqe {

// Dense row-major matrix of doubles. All network math runs in 64-bit so the
// finite-difference gradient checks have headroom.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

  double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
  double* row(int r) { return a.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const { return a.data() + static_cast<size_t>(r) * cols; }

  size_t size() const { return a.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
  bool empty() const { return a.empty(); }

  void fill(double v) { a.assign(a.size(), v); }
  bool all_finite() const;

  bool operator==(const Mat& o) const { return rows == o.rows && cols == o.cols && a == o.a; }
};

Mat matmul(const Mat& A, const Mat& B);     // A * B
Mat matmul_nt(const Mat& A, const Mat& B);  // A * B^T
Mat matmul_tn(const Mat& A, const Mat& B);  // A^T * B

}

#endif
