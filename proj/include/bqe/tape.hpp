// SPDX-License-Identifier: Apache-2.0

#ifndef BQE_TAPE_HPP
#define BQE_TAPE_HPP

#include <functional>
#include <string>
#include <vector>

#include "bqe/mat.hpp"
#include "bqe/params.hpp"

namespace bqe {

// Define-by-run reverse-mode tape over Mat values. Values are computed at
// node creation; backward() walks the tape in reverse and accumulates into
// bound Param::grad buffers. One tape per forward pass.
class Tape {
 public:
  using NodeId = int;

  NodeId constant(Mat value);
  NodeId param(Param& p);

  NodeId matmul(NodeId a, NodeId b);     // A * B
  NodeId matmul_nt(NodeId a, NodeId b);  // A * B^T
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId hadamard(NodeId a, NodeId b);
  NodeId scale(NodeId a, double s);
  NodeId add_row(NodeId a, NodeId row);            // broadcast 1 x c row (bias)
  NodeId broadcast_col(NodeId a, int cols);        // n x 1 -> n x c
  NodeId leaky_relu(NodeId a, double slope);
  NodeId softmax_rows(NodeId a);
  // Softmax over blocks of `group` consecutive rows, independently per column.
  NodeId softmax_groups(NodeId a, int group);
  // Sums blocks of `group` consecutive rows: (g*group) x c -> g x c.
  NodeId sum_groups(NodeId a, int group);
  NodeId gather_rows(NodeId a, std::vector<int> idx);
  NodeId concat_cols(const std::vector<NodeId>& parts);
  NodeId concat_rows(const std::vector<NodeId>& parts);
  NodeId mean_rows(NodeId a);  // n x c -> 1 x c
  NodeId sum_all(NodeId a);    // -> 1 x 1
  // out = s(i, j) * a, with gradient flowing into both factors.
  NodeId scale_by_entry(NodeId a, NodeId s, int i, int j);
  NodeId detach(NodeId a);

  // Scalar losses. Targets are plain data, not differentiated through.
  NodeId mse_against(NodeId a, Mat target);               // mean over rows of squared error
  NodeId soft_cross_entropy(NodeId p, Mat soft_targets);  // -sum g*log(max(p, 1e-12))

  const Mat& val(NodeId id) const { return nodes_[id].value; }
  const Mat& grad(NodeId id) const { return nodes_[id].grad; }

  // Seeds d(root)/d(root) = 1 (root must be 1 x 1) and accumulates gradients
  // into every reachable Param.
  void backward(NodeId root);

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool needs_grad = false;
    std::function<void(Tape&, Node&)> backprop;
  };

  NodeId push(Mat value, bool needs_grad, std::function<void(Tape&, Node&)> backprop);
  Mat& grad_buf(NodeId id);

  std::vector<Node> nodes_;
};

}

#endif
