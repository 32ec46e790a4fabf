// core/src/nn/adam.cc
#include "revoice/nn/adam.h"

#include <cmath>

namespace revoice::nn {

void Adam::step(const std::vector<Param*>& params) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (Param* p : params) {
    if (!p->trainable) continue;
    p->m = beta1_ * p->m + (1.0 - beta1_) * p->grad;
    p->v = beta2_ * p->v + (1.0 - beta2_) * p->grad.cwiseProduct(p->grad);
    const Mat mhat = p->m / bc1;
    const Mat vhat = p->v / bc2;
    p->value -= lr_ * mhat.cwiseQuotient((vhat.cwiseSqrt().array() + eps_).matrix());
    p->grad.setZero();
  }
}

}  // namespace revoice::nn
