// SPDX-License-Identifier: Apache-2.0

#include "bqe/metrics.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bqe {

double psnr(std::span<const double> a, std::span<const double> b, double peak) {
  if (a.size() != b.size()) throw std::invalid_argument("psnr: shape-mismatch");
  if (a.empty()) throw std::invalid_argument("psnr: empty input");
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  double mse = acc / a.size();
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double psnr(const Mat& a, const Mat& b, double peak) {
  if (!a.same_shape(b)) throw std::invalid_argument("psnr: shape-mismatch");
  return psnr(std::span<const double>(a.a), std::span<const double>(b.a), peak);
}

double delta_psnr(std::span<const double> enhanced, std::span<const double> decoded,
                  std::span<const double> original, double peak) {
  return psnr(enhanced, original, peak) - psnr(decoded, original, peak);
}

double ycbcr_psnr(double psnr_y, double psnr_cb, double psnr_cr) {
  return (6.0 * psnr_y + psnr_cb + psnr_cr) / 8.0;
}

RDCurve RDCurve::from_points(std::vector<Point> pts) {
  for (size_t i = 0; i < pts.size(); ++i) {
    if (!(pts[i].bpip > 0.0)) throw std::invalid_argument("rd-curve: bpip must be positive");
    if (i > 0 && !(pts[i].bpip > pts[i - 1].bpip))
      throw std::invalid_argument("rd-curve: bpip must be strictly increasing");
  }
  RDCurve c;
  c.points = std::move(pts);
  return c;
}

namespace {

// Least-squares cubic of log10(bpip) as a function of PSNR, centered on the
// curve's mean PSNR for conditioning.
struct CubicFit {
  double shift = 0.0;
  double c[4] = {0, 0, 0, 0};

  double integral(double lo, double hi) const {
    double a = lo - shift, b = hi - shift;
    double acc = 0.0;
    double pa = a, pb = b;
    for (int i = 0; i < 4; ++i) {
      acc += c[i] / (i + 1) * (pb - pa);
      pa *= a;
      pb *= b;
    }
    return acc;
  }
};

void solve4(double A[4][4], double b[4], double x[4]) {
  int perm[4] = {0, 1, 2, 3};
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(A[perm[r]][col]) > std::abs(A[perm[piv]][col])) piv = r;
    std::swap(perm[col], perm[piv]);
    double diag = A[perm[col]][col];
    if (diag == 0.0) throw std::runtime_error("bd_rate: singular fit (degenerate curve)");
    for (int r = col + 1; r < 4; ++r) {
      double f = A[perm[r]][col] / diag;
      if (f == 0.0) continue;
      for (int cc = col; cc < 4; ++cc) A[perm[r]][cc] -= f * A[perm[col]][cc];
      b[perm[r]] -= f * b[perm[col]];
    }
  }
  for (int row = 3; row >= 0; --row) {
    double acc = b[perm[row]];
    for (int cc = row + 1; cc < 4; ++cc) acc -= A[perm[row]][cc] * x[cc];
    x[row] = acc / A[perm[row]][row];
  }
}

CubicFit fit_log_rate(const std::vector<RDCurve::Point>& pts) {
  CubicFit fit;
  for (const auto& p : pts) fit.shift += p.psnr;
  fit.shift /= pts.size();

  double A[4][4] = {};
  double b[4] = {};
  for (const auto& p : pts) {
    double x = p.psnr - fit.shift;
    double y = std::log10(p.bpip);
    double powx[7];
    powx[0] = 1.0;
    for (int i = 1; i < 7; ++i) powx[i] = powx[i - 1] * x;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) A[i][j] += powx[i + j];
      b[i] += powx[i] * y;
    }
  }
  solve4(A, b, fit.c);
  return fit;
}

std::vector<RDCurve::Point> finite_points(const RDCurve& curve, const char* which) {
  std::vector<RDCurve::Point> pts;
  for (const auto& p : curve.points) {
    if (std::isinf(p.psnr)) {
      std::cerr << "bd_rate: warning: dropping infinite-PSNR point (bpip=" << p.bpip << ") from "
                << which << " curve\n";
      continue;
    }
    pts.push_back(p);
  }
  return pts;
}

}  // namespace

double bd_rate(const RDCurve& anchor, const RDCurve& test) {
  std::vector<RDCurve::Point> pa = finite_points(anchor, "anchor");
  std::vector<RDCurve::Point> pt = finite_points(test, "test");
  if (pa.size() < 4 || pt.size() < 4)
    throw std::invalid_argument("bd_rate: fewer-than-4-points after excluding infinite PSNR");

  auto span_of = [](const std::vector<RDCurve::Point>& pts) {
    double lo = pts[0].psnr, hi = pts[0].psnr;
    for (const auto& p : pts) {
      lo = std::min(lo, p.psnr);
      hi = std::max(hi, p.psnr);
    }
    return std::pair<double, double>(lo, hi);
  };
  auto [alo, ahi] = span_of(pa);
  auto [tlo, thi] = span_of(pt);
  double lo = std::max(alo, tlo);
  double hi = std::min(ahi, thi);
  if (!(hi > lo)) throw std::invalid_argument("bd_rate: no-psnr-overlap");

  CubicFit fa = fit_log_rate(pa);
  CubicFit ft = fit_log_rate(pt);
  double avg_diff = (ft.integral(lo, hi) - fa.integral(lo, hi)) / (hi - lo);
  return (std::pow(10.0, avg_diff) - 1.0) * 100.0;
}

RDCurve RdTable::curve_y() const {
  std::vector<RDCurve::Point> pts;
  for (size_t i = 0; i < size(); ++i) pts.push_back({bpip[i], y[i]});
  return RDCurve::from_points(std::move(pts));
}

RDCurve RdTable::curve_cb() const {
  std::vector<RDCurve::Point> pts;
  for (size_t i = 0; i < size(); ++i) pts.push_back({bpip[i], cb[i]});
  return RDCurve::from_points(std::move(pts));
}

RDCurve RdTable::curve_cr() const {
  std::vector<RDCurve::Point> pts;
  for (size_t i = 0; i < size(); ++i) pts.push_back({bpip[i], cr[i]});
  return RDCurve::from_points(std::move(pts));
}

RDCurve RdTable::curve_ycbcr() const {
  std::vector<RDCurve::Point> pts;
  for (size_t i = 0; i < size(); ++i) pts.push_back({bpip[i], ycbcr_psnr(y[i], cb[i], cr[i])});
  return RDCurve::from_points(std::move(pts));
}

RdTable read_rd_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("malformed-csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("malformed-csv: empty file '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "bpip,psnr_y,psnr_cb,psnr_cr")
    throw std::runtime_error("malformed-csv: bad header '" + line + "'");

  RdTable table;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    double vals[4];
    std::string cell;
    for (int c = 0; c < 4; ++c) {
      if (!std::getline(ls, cell, ','))
        throw std::runtime_error("malformed-csv: row " + std::to_string(row) + " in '" + path + "'");
      try {
        vals[c] = std::stod(cell);
      } catch (const std::exception&) {
        throw std::runtime_error("malformed-csv: bad number '" + cell + "' at row " +
                                 std::to_string(row));
      }
    }
    table.bpip.push_back(vals[0]);
    table.y.push_back(vals[1]);
    table.cb.push_back(vals[2]);
    table.cr.push_back(vals[3]);
  }
  return table;
}

void write_rd_csv(const RdTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("unwritable-path: '" + path + "'");
  out << "bpip,psnr_y,psnr_cb,psnr_cr\n";
  out.precision(10);
  for (size_t i = 0; i < table.size(); ++i)
    out << table.bpip[i] << ',' << table.y[i] << ',' << table.cb[i] << ',' << table.cr[i] << '\n';
}

}
