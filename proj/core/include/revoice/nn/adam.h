// core/include/revoice/nn/adam.h
#ifndef REVOICE_NN_ADAM_H_
#define REVOICE_NN_ADAM_H_

#include <cstdint>
#include <vector>

#include "revoice/nn/param.h"

namespace revoice::nn {

class Adam {
 public:
  explicit Adam(double lr = 2e-4, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // One update over the given parameters using their accumulated .grad,
  // then zeroes those grads. Non-trainable params are skipped.
  void step(const std::vector<Param*>& params);

  int64_t steps_taken() const { return t_; }
  void set_steps_taken(int64_t t) { t_ = t; }
  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
};

}  // namespace revoice::nn

#endif  // REVOICE_NN_ADAM_H_
