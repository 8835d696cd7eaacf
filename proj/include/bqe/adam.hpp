// SPDX-License-Identifier: Apache-2.0

#ifndef BQE_ADAM_HPP
#define BQE_ADAM_HPP

#include <map>
#include <string>

#include "bqe/params.hpp"

namespace bqe {

// Adam with bias correction. Non-trainable params are skipped entirely; their
// values and moment slots are never touched.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParamStore& store);
  int steps_taken() const { return t_; }
  double learning_rate() const { return lr_; }

 private:
  struct Slot {
    Mat m, v;
  };
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::map<std::string, Slot> slots_;
};

}

#endif
