// SPDX-License-Identifier: Apache-2.0

#include "bqe/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bqe {

namespace {
constexpr double kLogClamp = 1e-12;

double group_mean(const std::vector<int>& qps, const char* which) {
  if (qps.empty()) throw std::invalid_argument(std::string("qp_centers: empty-group: ") + which);
  double sum = 0.0;
  for (int q : qps) sum += q;
  return sum / qps.size();
}
}  // namespace

DistortionGrouping DistortionGrouping::defaults() {
  DistortionGrouping g;
  g.low = {28, 22};
  g.medium = {40, 34};
  g.high = {51, 46};
  g.sigma = 5.0;
  return g;
}

bool DistortionGrouping::contains(int qp) const { return level_of(qp) >= 0; }

int DistortionGrouping::level_of(int qp) const {
  if (std::find(low.begin(), low.end(), qp) != low.end()) return 0;
  if (std::find(medium.begin(), medium.end(), qp) != medium.end()) return 1;
  if (std::find(high.begin(), high.end(), qp) != high.end()) return 2;
  return -1;
}

int DistortionGrouping::level_count_present() const {
  return (low.empty() ? 0 : 1) + (medium.empty() ? 0 : 1) + (high.empty() ? 0 : 1);
}

Centers qp_centers(const DistortionGrouping& grouping) {
  Centers c;
  c.low = group_mean(grouping.low, "low");
  c.medium = group_mean(grouping.medium, "medium");
  c.high = group_mean(grouping.high, "high");
  if (!(c.low < c.medium && c.medium < c.high))
    throw std::invalid_argument("qp_centers: centers not strictly ordered low < medium < high");
  return c;
}

SoftLabel soft_label(double qp, const DistortionGrouping& grouping) {
  if (!(grouping.sigma > 0.0)) throw std::invalid_argument("soft_label: sigma must be positive");
  Centers c = qp_centers(grouping);
  double z[3] = {(qp - c.low) / grouping.sigma, (qp - c.medium) / grouping.sigma,
                 (qp - c.high) / grouping.sigma};
  double logit[3];
  for (int i = 0; i < 3; ++i) logit[i] = -0.5 * z[i] * z[i];
  double mx = std::max({logit[0], logit[1], logit[2]});
  double e[3], sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    e[i] = std::exp(logit[i] - mx);
    sum += e[i];
  }
  return {e[0] / sum, e[1] / sum, e[2] / sum};
}

double qe_loss(const QualityVector& p, const SoftLabel& g) {
  double loss = 0.0;
  loss -= g.low * std::log(std::max(p.low, kLogClamp));
  loss -= g.medium * std::log(std::max(p.medium, kLogClamp));
  loss -= g.high * std::log(std::max(p.high, kLogClamp));
  return loss;
}

double bqe_loss(const Mat& enhanced, const Mat& original) {
  if (!enhanced.same_shape(original)) throw std::invalid_argument("bqe_loss: shape-mismatch");
  if (enhanced.rows < 1) throw std::invalid_argument("bqe_loss: empty input");
  double acc = 0.0;
  for (size_t i = 0; i < enhanced.a.size(); ++i) {
    double d = enhanced.a[i] - original.a[i];
    acc += d * d;
  }
  return acc / enhanced.rows;
}

double soft_label_entropy(const SoftLabel& g) {
  double h = 0.0;
  for (double v : {g.low, g.medium, g.high})
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

}
