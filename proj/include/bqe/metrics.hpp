// SPDX-License-Identifier: Apache-2.0

#ifndef BQE_METRICS_HPP
#define BQE_METRICS_HPP

#include <span>
#include <string>
#include <vector>

#include "bqe/mat.hpp"

namespace bqe {

// 10*log10(peak^2 / MSE); +inf when the signals are identical.
double psnr(std::span<const double> a, std::span<const double> b, double peak = 255.0);
double psnr(const Mat& a, const Mat& b, double peak = 255.0);

// psnr(enhanced, original) - psnr(decoded, original).
double delta_psnr(std::span<const double> enhanced, std::span<const double> decoded,
                  std::span<const double> original, double peak = 255.0);

// 6:1:1 weighted component average.
double ycbcr_psnr(double psnr_y, double psnr_cb, double psnr_cr);

// Rate-distortion curve: bits per input point vs PSNR, strictly increasing
// in rate. BD-rate needs at least 4 points for the cubic fit.
struct RDCurve {
  struct Point {
    double bpip = 0.0;
    double psnr = 0.0;
  };
  std::vector<Point> points;

  static RDCurve from_points(std::vector<Point> pts);  // validates ordering
};

// Average rate change in percent at equal quality: cubic fit of log10(bpip)
// over PSNR per curve, integrated across the overlapping PSNR interval.
// Points with infinite PSNR are excluded (with a warning on stderr).
double bd_rate(const RDCurve& anchor, const RDCurve& test);

// RD CSV with header "bpip,psnr_y,psnr_cb,psnr_cr".
struct RdTable {
  std::vector<double> bpip, y, cb, cr;
  size_t size() const { return bpip.size(); }
  RDCurve curve_y() const;
  RDCurve curve_cb() const;
  RDCurve curve_cr() const;
  RDCurve curve_ycbcr() const;  // 6:1:1 per row
};

RdTable read_rd_csv(const std::string& path);
void write_rd_csv(const RdTable& table, const std::string& path);

}

#endif
