// SPDX-License-Identifier: Apache-2.0

#include "bqe/adam.hpp"

#include <cmath>

namespace bqe {

void Adam::step(ParamStore& store) {
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, t_);
  double bc2 = 1.0 - std::pow(beta2_, t_);
  for (Param* p : store.all()) {
    if (!p->trainable) continue;
    Slot& slot = slots_[p->name];
    if (slot.m.empty()) {
      slot.m = Mat(p->value.rows, p->value.cols);
      slot.v = Mat(p->value.rows, p->value.cols);
    }
    for (size_t i = 0; i < p->value.a.size(); ++i) {
      double g = p->grad.a[i];
      slot.m.a[i] = beta1_ * slot.m.a[i] + (1.0 - beta1_) * g;
      slot.v.a[i] = beta2_ * slot.v.a[i] + (1.0 - beta2_) * g * g;
      double mhat = slot.m.a[i] / bc1;
      double vhat = slot.v.a[i] / bc2;
      p->value.a[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

}
