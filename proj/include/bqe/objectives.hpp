// SPDX-License-Identifier: Apache-2.0

#ifndef BQE_OBJECTIVES_HPP
#define BQE_OBJECTIVES_HPP

#include <vector>

#include "bqe/mat.hpp"

namespace bqe {

// Estimated probability of the frame sitting at each distortion level.
struct QualityVector {
  double low = 0.0, medium = 0.0, high = 0.0;
};

// QPs bucketed into three ordinal distortion levels. Lower QP means lower
// distortion.
struct DistortionGrouping {
  std::vector<int> low;     // e.g. {28, 22}
  std::vector<int> medium;  // e.g. {40, 34}
  std::vector<int> high;    // e.g. {51, 46}
  double sigma = 5.0;

  static DistortionGrouping defaults();  // {28,22} / {40,34} / {51,46}, sigma 5
  bool contains(int qp) const;
  // 0 = low, 1 = medium, 2 = high; -1 if the QP is in no group.
  int level_of(int qp) const;
  int level_count_present() const;
};

struct Centers {
  double low = 0.0, medium = 0.0, high = 0.0;
};

// Per-level arithmetic mean of the group QPs.
Centers qp_centers(const DistortionGrouping& grouping);

struct SoftLabel {
  double low = 0.0, medium = 0.0, high = 0.0;
};

// Gaussian-kernel soft label over the three level centers, normalized with
// max subtraction. Strictly positive simplex for any finite q.
SoftLabel soft_label(double qp, const DistortionGrouping& grouping);

// Cross entropy -sum g_i log(p_i) with p clamped below at 1e-12.
double qe_loss(const QualityVector& p, const SoftLabel& g);

// Mean squared attribute error, (1/n) * sum of squared differences.
double bqe_loss(const Mat& enhanced, const Mat& original);

double soft_label_entropy(const SoftLabel& g);

}

#endif
