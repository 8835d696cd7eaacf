// SPDX-License-Identifier: Apache-2.0

#include "bqe/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace bqe {

namespace {
constexpr double kLogClamp = 1e-12;
}

Tape::NodeId Tape::push(Mat value, bool needs_grad, std::function<void(Tape&, Node&)> backprop) {
  Node node;
  node.value = std::move(value);
  node.needs_grad = needs_grad;
  node.backprop = std::move(backprop);
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size()) - 1;
}

Mat& Tape::grad_buf(NodeId id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Mat(n.value.rows, n.value.cols);
  return n.grad;
}

Tape::NodeId Tape::constant(Mat value) { return push(std::move(value), false, nullptr); }

Tape::NodeId Tape::param(Param& p) {
  Param* ptr = &p;
  return push(p.value, true, [ptr](Tape&, Node& self) {
    for (size_t i = 0; i < self.grad.a.size(); ++i) ptr->grad.a[i] += self.grad.a[i];
  });
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
  const Mat& A = val(a);
  const Mat& B = val(b);
  Mat C = bqe::matmul(A, B);
  bool ng = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return push(std::move(C), ng, [a, b](Tape& t, Node& self) {
    if (t.nodes_[a].needs_grad) {
      Mat da = bqe::matmul_nt(self.grad, t.val(b));
      Mat& acc = t.grad_buf(a);
      for (size_t i = 0; i < acc.a.size(); ++i) acc.a[i] += da.a[i];
    }
    if (t.nodes_[b].needs_grad) {
      Mat db = bqe::matmul_tn(t.val(a), self.grad);
      Mat& acc = t.grad_buf(b);
      for (size_t i = 0; i < acc.a.size(); ++i) acc.a[i] += db.a[i];
    }
  });
}

Tape::NodeId Tape::matmul_nt(NodeId a, NodeId b) {
  Mat C = bqe::matmul_nt(val(a), val(b));
  bool ng = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return push(std::move(C), ng, [a, b](Tape& t, Node& self) {
    if (t.nodes_[a].needs_grad) {
      Mat da = bqe::matmul(self.grad, t.val(b));
      Mat& acc = t.grad_buf(a);
      for (size_t i = 0; i < acc.a.size(); ++i) acc.a[i] += da.a[i];
    }
    if (t.nodes_[b].needs_grad) {
      Mat db = bqe::matmul_tn(self.grad, t.val(a));
      Mat& acc = t.grad_buf(b);
      for (size_t i = 0; i < acc.a.size(); ++i) acc.a[i] += db.a[i];
    }
  });
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  const Mat& A = val(a);
  const Mat& B = val(b);
  if (!A.same_shape(B)) throw std::invalid_argument("tape add: shape mismatch");
  Mat C = A;
  for (size_t i = 0; i < C.a.size(); ++i) C.a[i] += B.a[i];
  bool ng = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return push(std::move(C), ng, [a, b](Tape& t, Node& self) {
    for (NodeId p : {a, b}) {
      if (!t.nodes_[p].needs_grad) continue;
      Mat& acc = t.grad_buf(p);
      for (size_t i = 0; i < acc.a.size(); ++i) acc.a[i] += self.grad.a[i];
    }
  });
}

Tape::NodeId Tape::sub(NodeId a, NodeId b) {
  const Mat& A = val(a);
  const Mat& B = val(b);
  if (!A.same_shape(B)) throw std::invalid_argument("tape sub: shape mismatch");
  Mat C = A;
  for (size_t i = 0; i < C.a.size(); ++i) C.a[i] -= B.a[i];
  bool ng = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return push(std::move(C), ng, [a, b](Tape& t, Node& self) {
    if (t.nodes_[a].needs_grad) {
      Mat& acc = t.grad_buf(a);
      for (size_t i = 0; i < acc.a.size(); ++i) acc.a[i] += self.grad.a[i];
    }
    if (t.nodes_[b].needs_grad) {
      Mat& acc = t.grad_buf(b);
      for (size_t i = 0; i < acc.a.size(); ++i) acc.a[i] -= self.grad.a[i];
    }
  });
}

Tape::NodeId Tape::hadamard(NodeId a, NodeId b) {
  const Mat& A = val(a);
  const Mat& B = val(b);
  if (!A.same_shape(B)) throw std::invalid_argument("tape hadamard: shape mismatch");
  Mat C = A;
  for (size_t i = 0; i < C.a.size(); ++i) C.a[i] *= B.a[i];
  bool ng = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return push(std::move(C), ng, [a, b](Tape& t, Node& self) {
    if (t.nodes_[a].needs_grad) {
      Mat& acc = t.grad_buf(a);
      const Mat& B2 = t.val(b);
      for (size_t i = 0; i < acc.a.size(); ++i) acc.a[i] += self.grad.a[i] * B2.a[i];
    }
    if (t.nodes_[b].needs_grad) {
      Mat& acc = t.grad_buf(b);
      const Mat& A2 = t.val(a);
      for (size_t i = 0; i < acc.a.size(); ++i) acc.a[i] += self.grad.a[i] * A2.a[i];
    }
  });
}

Tape::NodeId Tape::scale(NodeId a, double s) {
  Mat C = val(a);
  for (double& v : C.a) v *= s;
  return push(std::move(C), nodes_[a].needs_grad, [a, s](Tape& t, Node& self) {
    if (!t.nodes_[a].needs_grad) return;
    Mat& acc = t.grad_buf(a);
    for (size_t i = 0; i < acc.a.size(); ++i) acc.a[i] += s * self.grad.a[i];
  });
}

Tape::NodeId Tape::add_row(NodeId a, NodeId row) {
  const Mat& A = val(a);
  const Mat& R = val(row);
  if (R.rows != 1 || R.cols != A.cols) throw std::invalid_argument("tape add_row: shape mismatch");
  Mat C = A;
  for (int i = 0; i < C.rows; ++i) {
    double* ci = C.row(i);
    for (int j = 0; j < C.cols; ++j) ci[j] += R(0, j);
  }
  bool ng = nodes_[a].needs_grad || nodes_[row].needs_grad;
  return push(std::move(C), ng, [a, row](Tape& t, Node& self) {
    if (t.nodes_[a].needs_grad) {
      Mat& acc = t.grad_buf(a);
      for (size_t i = 0; i < acc.a.size(); ++i) acc.a[i] += self.grad.a[i];
    }
    if (t.nodes_[row].needs_grad) {
      Mat& acc = t.grad_buf(row);
      for (int i = 0; i < self.grad.rows; ++i) {
        const double* gi = self.grad.row(i);
        for (int j = 0; j < self.grad.cols; ++j) acc(0, j) += gi[j];
      }
    }
  });
}

Tape::NodeId Tape::broadcast_col(NodeId a, int cols) {
  const Mat& A = val(a);
  if (A.cols != 1) throw std::invalid_argument("tape broadcast_col: expected n x 1");
  Mat C(A.rows, cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < cols; ++j) C(i, j) = A(i, 0);
  return push(std::move(C), nodes_[a].needs_grad, [a](Tape& t, Node& self) {
    if (!t.nodes_[a].needs_grad) return;
    Mat& acc = t.grad_buf(a);
    for (int i = 0; i < self.grad.rows; ++i) {
      const double* gi = self.grad.row(i);
      double s = 0.0;
      for (int j = 0; j < self.grad.cols; ++j) s += gi[j];
      acc(i, 0) += s;
    }
  });
}

Tape::NodeId Tape::leaky_relu(NodeId a, double slope) {
  Mat C = val(a);
  for (double& v : C.a) v = v >= 0.0 ? v : slope * v;
  return push(std::move(C), nodes_[a].needs_grad, [a, slope](Tape& t, Node& self) {
    if (!t.nodes_[a].needs_grad) return;
    const Mat& A = t.val(a);
    Mat& acc = t.grad_buf(a);
    for (size_t i = 0; i < acc.a.size(); ++i)
      acc.a[i] += self.grad.a[i] * (A.a[i] >= 0.0 ? 1.0 : slope);
  });
}

Tape::NodeId Tape::softmax_rows(NodeId a) {
  Mat C = val(a);
  for (int i = 0; i < C.rows; ++i) {
    double* r = C.row(i);
    double mx = r[0];
    for (int j = 1; j < C.cols; ++j) mx = std::max(mx, r[j]);
    double sum = 0.0;
    for (int j = 0; j < C.cols; ++j) {
      r[j] = std::exp(r[j] - mx);
      sum += r[j];
    }
    for (int j = 0; j < C.cols; ++j) r[j] /= sum;
  }
  return push(std::move(C), nodes_[a].needs_grad, [a](Tape& t, Node& self) {
    if (!t.nodes_[a].needs_grad) return;
    Mat& acc = t.grad_buf(a);
    for (int i = 0; i < self.value.rows; ++i) {
      const double* y = self.value.row(i);
      const double* dy = self.grad.row(i);
      double dot = 0.0;
      for (int j = 0; j < self.value.cols; ++j) dot += y[j] * dy[j];
      double* gi = acc.row(i);
      for (int j = 0; j < self.value.cols; ++j) gi[j] += y[j] * (dy[j] - dot);
    }
  });
}

Tape::NodeId Tape::softmax_groups(NodeId a, int group) {
  const Mat& A = val(a);
  if (group < 1 || A.rows % group != 0)
    throw std::invalid_argument("tape softmax_groups: rows not a multiple of group");
  Mat C = A;
  int groups = A.rows / group;
  for (int g = 0; g < groups; ++g) {
    for (int j = 0; j < A.cols; ++j) {
      int base = g * group;
      double mx = C(base, j);
      for (int r = 1; r < group; ++r) mx = std::max(mx, C(base + r, j));
      double sum = 0.0;
      for (int r = 0; r < group; ++r) {
        double e = std::exp(C(base + r, j) - mx);
        C(base + r, j) = e;
        sum += e;
      }
      for (int r = 0; r < group; ++r) C(base + r, j) /= sum;
    }
  }
  return push(std::move(C), nodes_[a].needs_grad, [a, group](Tape& t, Node& self) {
    if (!t.nodes_[a].needs_grad) return;
    Mat& acc = t.grad_buf(a);
    int groups = self.value.rows / group;
    for (int g = 0; g < groups; ++g) {
      int base = g * group;
      for (int j = 0; j < self.value.cols; ++j) {
        double dot = 0.0;
        for (int r = 0; r < group; ++r) dot += self.value(base + r, j) * self.grad(base + r, j);
        for (int r = 0; r < group; ++r)
          acc(base + r, j) += self.value(base + r, j) * (self.grad(base + r, j) - dot);
      }
    }
  });
}

Tape::NodeId Tape::sum_groups(NodeId a, int group) {
  const Mat& A = val(a);
  if (group < 1 || A.rows % group != 0)
    throw std::invalid_argument("tape sum_groups: rows not a multiple of group");
  int groups = A.rows / group;
  Mat C(groups, A.cols);
  for (int g = 0; g < groups; ++g)
    for (int r = 0; r < group; ++r) {
      const double* src = A.row(g * group + r);
      double* dst = C.row(g);
      for (int j = 0; j < A.cols; ++j) dst[j] += src[j];
    }
  return push(std::move(C), nodes_[a].needs_grad, [a, group](Tape& t, Node& self) {
    if (!t.nodes_[a].needs_grad) return;
    Mat& acc = t.grad_buf(a);
    int groups = self.value.rows;
    for (int g = 0; g < groups; ++g) {
      const double* gr = self.grad.row(g);
      for (int r = 0; r < group; ++r) {
        double* dst = acc.row(g * group + r);
        for (int j = 0; j < self.value.cols; ++j) dst[j] += gr[j];
      }
    }
  });
}

Tape::NodeId Tape::gather_rows(NodeId a, std::vector<int> idx) {
  const Mat& A = val(a);
  Mat C(static_cast<int>(idx.size()), A.cols);
  for (size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0 || idx[r] >= A.rows)
      throw std::out_of_range("tape gather_rows: neighbor-index-out-of-range");
    const double* src = A.row(idx[r]);
    double* dst = C.row(static_cast<int>(r));
    for (int j = 0; j < A.cols; ++j) dst[j] = src[j];
  }
  return push(std::move(C), nodes_[a].needs_grad,
              [a, idx = std::move(idx)](Tape& t, Node& self) {
                if (!t.nodes_[a].needs_grad) return;
                Mat& acc = t.grad_buf(a);
                for (size_t r = 0; r < idx.size(); ++r) {
                  const double* src = self.grad.row(static_cast<int>(r));
                  double* dst = acc.row(idx[r]);
                  for (int j = 0; j < self.grad.cols; ++j) dst[j] += src[j];
                }
              });
}

Tape::NodeId Tape::concat_cols(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw std::invalid_argument("tape concat_cols: no parts");
  int rows = val(parts[0]).rows;
  int cols = 0;
  bool ng = false;
  for (NodeId p : parts) {
    if (val(p).rows != rows) throw std::invalid_argument("tape concat_cols: row mismatch");
    cols += val(p).cols;
    ng = ng || nodes_[p].needs_grad;
  }
  Mat C(rows, cols);
  int off = 0;
  for (NodeId p : parts) {
    const Mat& P = val(p);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < P.cols; ++j) C(i, off + j) = P(i, j);
    off += P.cols;
  }
  return push(std::move(C), ng, [parts](Tape& t, Node& self) {
    int off = 0;
    for (NodeId p : parts) {
      const Mat& P = t.val(p);
      if (t.nodes_[p].needs_grad) {
        Mat& acc = t.grad_buf(p);
        for (int i = 0; i < P.rows; ++i)
          for (int j = 0; j < P.cols; ++j) acc(i, j) += self.grad(i, off + j);
      }
      off += P.cols;
    }
  });
}

Tape::NodeId Tape::concat_rows(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw std::invalid_argument("tape concat_rows: no parts");
  int cols = val(parts[0]).cols;
  int rows = 0;
  bool ng = false;
  for (NodeId p : parts) {
    if (val(p).cols != cols) throw std::invalid_argument("tape concat_rows: column mismatch");
    rows += val(p).rows;
    ng = ng || nodes_[p].needs_grad;
  }
  Mat C(rows, cols);
  int off = 0;
  for (NodeId p : parts) {
    const Mat& P = val(p);
    for (int i = 0; i < P.rows; ++i)
      for (int j = 0; j < cols; ++j) C(off + i, j) = P(i, j);
    off += P.rows;
  }
  return push(std::move(C), ng, [parts](Tape& t, Node& self) {
    int off = 0;
    for (NodeId p : parts) {
      const Mat& P = t.val(p);
      if (t.nodes_[p].needs_grad) {
        Mat& acc = t.grad_buf(p);
        for (int i = 0; i < P.rows; ++i)
          for (int j = 0; j < P.cols; ++j) acc(i, j) += self.grad(off + i, j);
      }
      off += P.rows;
    }
  });
}

Tape::NodeId Tape::mean_rows(NodeId a) {
  const Mat& A = val(a);
  Mat C(1, A.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) C(0, j) += A(i, j);
  for (int j = 0; j < A.cols; ++j) C(0, j) /= A.rows;
  return push(std::move(C), nodes_[a].needs_grad, [a](Tape& t, Node& self) {
    if (!t.nodes_[a].needs_grad) return;
    Mat& acc = t.grad_buf(a);
    double inv = 1.0 / acc.rows;
    for (int i = 0; i < acc.rows; ++i)
      for (int j = 0; j < acc.cols; ++j) acc(i, j) += self.grad(0, j) * inv;
  });
}

Tape::NodeId Tape::sum_all(NodeId a) {
  const Mat& A = val(a);
  Mat C(1, 1);
  for (double v : A.a) C(0, 0) += v;
  return push(std::move(C), nodes_[a].needs_grad, [a](Tape& t, Node& self) {
    if (!t.nodes_[a].needs_grad) return;
    Mat& acc = t.grad_buf(a);
    for (double& v : acc.a) v += self.grad(0, 0);
  });
}

Tape::NodeId Tape::scale_by_entry(NodeId a, NodeId s, int i, int j) {
  double f = val(s)(i, j);
  Mat C = val(a);
  for (double& v : C.a) v *= f;
  bool ng = nodes_[a].needs_grad || nodes_[s].needs_grad;
  return push(std::move(C), ng, [a, s, i, j, f](Tape& t, Node& self) {
    if (t.nodes_[a].needs_grad) {
      Mat& acc = t.grad_buf(a);
      for (size_t x = 0; x < acc.a.size(); ++x) acc.a[x] += f * self.grad.a[x];
    }
    if (t.nodes_[s].needs_grad) {
      const Mat& A = t.val(a);
      double dot = 0.0;
      for (size_t x = 0; x < A.a.size(); ++x) dot += A.a[x] * self.grad.a[x];
      t.grad_buf(s)(i, j) += dot;
    }
  });
}

Tape::NodeId Tape::detach(NodeId a) { return push(val(a), false, nullptr); }

Tape::NodeId Tape::mse_against(NodeId a, Mat target) {
  const Mat& A = val(a);
  if (!A.same_shape(target)) throw std::invalid_argument("tape mse_against: shape-mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < A.a.size(); ++i) {
    double d = A.a[i] - target.a[i];
    acc += d * d;
  }
  Mat C(1, 1);
  C(0, 0) = acc / A.rows;
  return push(std::move(C), nodes_[a].needs_grad,
              [a, target = std::move(target)](Tape& t, Node& self) {
                if (!t.nodes_[a].needs_grad) return;
                const Mat& A = t.val(a);
                Mat& acc = t.grad_buf(a);
                double g = self.grad(0, 0) * 2.0 / A.rows;
                for (size_t i = 0; i < acc.a.size(); ++i)
                  acc.a[i] += g * (A.a[i] - target.a[i]);
              });
}

Tape::NodeId Tape::soft_cross_entropy(NodeId p, Mat soft_targets) {
  const Mat& P = val(p);
  if (!P.same_shape(soft_targets))
    throw std::invalid_argument("tape soft_cross_entropy: shape-mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < P.a.size(); ++i)
    acc -= soft_targets.a[i] * std::log(std::max(P.a[i], kLogClamp));
  Mat C(1, 1);
  C(0, 0) = acc;
  return push(std::move(C), nodes_[p].needs_grad,
              [p, g = std::move(soft_targets)](Tape& t, Node& self) {
                if (!t.nodes_[p].needs_grad) return;
                const Mat& P = t.val(p);
                Mat& acc = t.grad_buf(p);
                double seed = self.grad(0, 0);
                for (size_t i = 0; i < acc.a.size(); ++i) {
                  if (P.a[i] > kLogClamp) acc.a[i] -= seed * g.a[i] / P.a[i];
                }
              });
}

void Tape::backward(NodeId root) {
  const Mat& r = val(root);
  if (r.rows != 1 || r.cols != 1) throw std::invalid_argument("tape backward: root must be 1 x 1");
  grad_buf(root)(0, 0) = 1.0;
  for (int i = root; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.empty() || !n.backprop) continue;
    n.backprop(*this, n);
  }
}

}
