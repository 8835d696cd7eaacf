// SPDX-License-Identifier: Apache-2.0

#include "bqe/mat.hpp"

#include <cmath>
#include <stdexcept>

#include "bqe/threading.hpp"

namespace bqe {

bool Mat::all_finite() const {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

Mat matmul(const Mat& A, const Mat& B) {
  if (A.cols != B.rows) throw std::invalid_argument("matmul: inner dimensions disagree");
  Mat C(A.rows, B.cols);
  parallel_for(A.rows, [&](int64_t r0, int64_t r1) {
    for (int64_t i = r0; i < r1; ++i) {
      double* ci = C.row(static_cast<int>(i));
      const double* ai = A.row(static_cast<int>(i));
      for (int l = 0; l < A.cols; ++l) {
        double ail = ai[l];
        if (ail == 0.0) continue;
        const double* bl = B.row(l);
        for (int j = 0; j < B.cols; ++j) ci[j] += ail * bl[j];
      }
    }
  });
  return C;
}

Mat matmul_nt(const Mat& A, const Mat& B) {
  if (A.cols != B.cols) throw std::invalid_argument("matmul_nt: inner dimensions disagree");
  Mat C(A.rows, B.rows);
  parallel_for(A.rows, [&](int64_t r0, int64_t r1) {
    for (int64_t i = r0; i < r1; ++i) {
      const double* ai = A.row(static_cast<int>(i));
      double* ci = C.row(static_cast<int>(i));
      for (int j = 0; j < B.rows; ++j) {
        const double* bj = B.row(j);
        double acc = 0.0;
        for (int l = 0; l < A.cols; ++l) acc += ai[l] * bj[l];
        ci[j] = acc;
      }
    }
  });
  return C;
}

Mat matmul_tn(const Mat& A, const Mat& B) {
  if (A.rows != B.rows) throw std::invalid_argument("matmul_tn: inner dimensions disagree");
  Mat C(A.cols, B.cols);
  parallel_for(A.cols, [&](int64_t c0, int64_t c1) {
    for (int64_t l = c0; l < c1; ++l) {
      double* cl = C.row(static_cast<int>(l));
      for (int i = 0; i < A.rows; ++i) {
        double ail = A(i, static_cast<int>(l));
        if (ail == 0.0) continue;
        const double* bi = B.row(i);
        for (int j = 0; j < B.cols; ++j) cl[j] += ail * bi[j];
      }
    }
  });
  return C;
}

}
