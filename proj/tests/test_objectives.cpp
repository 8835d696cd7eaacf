// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "bqe/objectives.hpp"

#include "testutil.hpp"

using namespace bqe;

namespace {

// Direct evaluation of the Gaussian soft-label formula, independent of the
// max-subtracted implementation path.
SoftLabel soft_label_oracle(double q, double c_low, double c_mid, double c_high, double sigma) {
  double e[3];
  double c[3] = {c_low, c_mid, c_high};
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    double z = (q - c[i]) / sigma;
    e[i] = std::exp(-0.5 * z * z);
    sum += e[i];
  }
  return {e[0] / sum, e[1] / sum, e[2] / sum};
}

QualityVector random_simplex(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.05, 1.0);
  double a = dist(rng), b = dist(rng), c = dist(rng);
  double s = a + b + c;
  return {a / s, b / s, c / s};
}

}  // namespace

TEST_CASE("qp centers for the default grouping") {
  Centers c = qp_centers(DistortionGrouping::defaults());
  CHECK(c.low == 25.0);
  CHECK(c.medium == 37.0);
  CHECK(c.high == 48.5);
}

TEST_CASE("qp centers for the modified qp set") {
  DistortionGrouping g;
  g.low = {31, 25};
  g.medium = {43, 37};
  g.high = {54, 49};
  Centers c = qp_centers(g);
  CHECK(c.low == 28.0);
  CHECK(c.medium == 40.0);
  CHECK(c.high == 51.5);
}

TEST_CASE("single-qp groups degenerate to that qp") {
  DistortionGrouping g;
  g.low = {28};
  g.medium = {40};
  g.high = {51};
  Centers c = qp_centers(g);
  CHECK(c.low == 28.0);
  CHECK(c.medium == 40.0);
  CHECK(c.high == 51.0);
}

TEST_CASE("qp centers reject an empty group") {
  DistortionGrouping g;
  g.medium = {40};
  g.high = {51};
  CHECK_THROWS_WITH_AS(qp_centers(g), doctest::Contains("empty-group"), std::invalid_argument);
}

TEST_CASE("soft label at the high/medium midpoint splits evenly") {
  SoftLabel g = soft_label(42.75, DistortionGrouping::defaults());
  CHECK(g.high == doctest::Approx(g.medium).epsilon(1e-12));
}

TEST_CASE("soft label at qp 51 matches the direct formula") {
  SoftLabel impl = soft_label(51.0, DistortionGrouping::defaults());
  SoftLabel oracle = soft_label_oracle(51.0, 25.0, 37.0, 48.5, 5.0);
  CHECK(std::abs(impl.low - oracle.low) < 1e-4);
  CHECK(std::abs(impl.medium - oracle.medium) < 1e-4);
  CHECK(std::abs(impl.high - oracle.high) < 1e-4);
  // frozen values from the direct evaluation
  CHECK(oracle.low == doctest::Approx(1.4892537833e-06).epsilon(1e-6));
  CHECK(oracle.medium == doctest::Approx(0.0219885068).epsilon(1e-8));
  CHECK(oracle.high == doctest::Approx(0.9780100039).epsilon(1e-8));
}

TEST_CASE("soft label at a center has that level as argmax") {
  SoftLabel g = soft_label(37.0, DistortionGrouping::defaults());
  CHECK(g.medium > g.low);
  CHECK(g.medium > g.high);
}

TEST_CASE("soft labels form a strictly positive simplex for any finite q") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-100.0, 200.0);
  for (int i = 0; i < 100; ++i) {
    SoftLabel g = soft_label(dist(rng), DistortionGrouping::defaults());
    CHECK(g.low > 0.0);
    CHECK(g.medium > 0.0);
    CHECK(g.high > 0.0);
    CHECK(g.low + g.medium + g.high == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("soft label argmax is the nearest center") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(0.0, 70.0);
  Centers c = qp_centers(DistortionGrouping::defaults());
  for (int i = 0; i < 200; ++i) {
    double q = dist(rng);
    SoftLabel g = soft_label(q, DistortionGrouping::defaults());
    double d[3] = {std::abs(q - c.low), std::abs(q - c.medium), std::abs(q - c.high)};
    double v[3] = {g.low, g.medium, g.high};
    int nearest = 0, argmax = 0;
    for (int j = 1; j < 3; ++j) {
      if (d[j] < d[nearest]) nearest = j;
      if (v[j] > v[argmax]) argmax = j;
    }
    bool near_midpoint = false;
    for (int j = 0; j < 3; ++j)
      if (j != nearest && std::abs(d[j] - d[nearest]) < 1e-6) near_midpoint = true;
    if (!near_midpoint) CHECK(argmax == nearest);
  }
}

TEST_CASE("qe loss against a one-hot label") {
  SoftLabel g{0.0, 0.0, 1.0};
  QualityVector p{0.1, 0.2, 0.7};
  CHECK(qe_loss(p, g) == doctest::Approx(0.356674943938732).epsilon(1e-12));
}

TEST_CASE("qe loss attains the entropy bound exactly at p = g") {
  SoftLabel g = soft_label(44.0, DistortionGrouping::defaults());
  QualityVector p{g.low, g.medium, g.high};
  CHECK(qe_loss(p, g) == doctest::Approx(soft_label_entropy(g)).epsilon(1e-12));
}

TEST_CASE("qe loss is near zero for a matching one-hot pair") {
  SoftLabel g{0.0, 1.0, 0.0};
  QualityVector p{0.0, 1.0, 0.0};
  CHECK(qe_loss(p, g) < 1e-10);
}

TEST_CASE("qe loss dominates the label entropy on random simplex pairs") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    QualityVector p = random_simplex(rng);
    QualityVector gq = random_simplex(rng);
    SoftLabel g{gq.low, gq.medium, gq.high};
    CHECK(qe_loss(p, g) >= soft_label_entropy(g) - 1e-12);
  }
}

TEST_CASE("qe loss gradient matches finite differences") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    QualityVector p = random_simplex(rng);
    QualityVector gq = random_simplex(rng);
    SoftLabel g{gq.low, gq.medium, gq.high};
    double h = 1e-7;
    double* slots[3] = {&p.low, &p.medium, &p.high};
    double analytic[3] = {-g.low / p.low, -g.medium / p.medium, -g.high / p.high};
    for (int i = 0; i < 3; ++i) {
      double saved = *slots[i];
      *slots[i] = saved + h;
      double fp = qe_loss(p, g);
      *slots[i] = saved - h;
      double fm = qe_loss(p, g);
      *slots[i] = saved;
      double fd = (fp - fm) / (2.0 * h);
      CHECK(std::abs(fd - analytic[i]) / std::max(std::abs(fd), 1e-6) < 1e-6);
    }
  }
}

TEST_CASE("bqe loss basics") {
  Mat a(4, 1), b(4, 1);
  for (int i = 0; i < 4; ++i) {
    a(i, 0) = 10.0 + i;
    b(i, 0) = a(i, 0);
  }
  CHECK(bqe_loss(a, b) == 0.0);
  for (int i = 0; i < 4; ++i) b(i, 0) += 3.0;
  CHECK(bqe_loss(a, b) == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(bqe_loss(a, b) == bqe_loss(b, a));
  Mat c(3, 1);
  CHECK_THROWS_WITH_AS(bqe_loss(a, c), doctest::Contains("shape-mismatch"),
                       std::invalid_argument);
}

TEST_CASE("bqe loss matches a two-pass accumulation oracle") {
  std::mt19937_64 rng(17);
  Mat a = testutil::random_mat(257, 1, rng, 0.0, 255.0);
  Mat b = testutil::random_mat(257, 1, rng, 0.0, 255.0);
  // first pass: residuals; second pass: accumulate
  std::vector<double> residual(a.a.size());
  for (size_t i = 0; i < a.a.size(); ++i) residual[i] = a.a[i] - b.a[i];
  double acc = 0.0;
  for (double r : residual) acc += r * r;
  CHECK(bqe_loss(a, b) == doctest::Approx(acc / 257.0).epsilon(1e-12));
}

TEST_CASE("bqe loss gradient matches finite differences") {
  std::mt19937_64 rng(19);
  Mat a = testutil::random_mat(12, 1, rng);
  Mat b = testutil::random_mat(12, 1, rng);
  double h = 1e-6;
  for (int i = 0; i < 12; ++i) {
    double analytic = 2.0 * (a(i, 0) - b(i, 0)) / 12.0;
    double saved = a(i, 0);
    a(i, 0) = saved + h;
    double fp = bqe_loss(a, b);
    a(i, 0) = saved - h;
    double fm = bqe_loss(a, b);
    a(i, 0) = saved;
    double fd = (fp - fm) / (2.0 * h);
    CHECK(std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-6}) < 1e-6);
  }
}
