// core/include/revoice/nn/param.h
#ifndef REVOICE_NN_PARAM_H_
#define REVOICE_NN_PARAM_H_

#include <Eigen/Core>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "revoice/base/rng.h"

namespace revoice::nn {

using Mat = Eigen::MatrixXd;

// A named tensor with accumulated gradient and Adam moments.
// Buffers (trainable = false) ride along in checkpoints but are never updated
// by the optimizer, e.g. VQ codebook EMA statistics.
struct Param {
  std::string name;
  Mat value;
  Mat grad;
  Mat m, v;  // Adam moments
  bool trainable = true;

  void zero_grad() { grad.setZero(); }
};

class ParamStore {
 public:
  Param& create(const std::string& name, int64_t rows, int64_t cols, bool trainable = true);
  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;
  bool has(const std::string& name) const;

  std::vector<Param*> all();                         // insertion order
  std::vector<Param*> trainable();
  std::vector<Param*> with_prefix(const std::string& prefix);
  std::vector<const Param*> all() const;
  int64_t parameter_count(bool trainable_only = true) const;
  void zero_grad();

 private:
  std::vector<std::unique_ptr<Param>> params_;
  std::map<std::string, size_t> index_;
};

void init_normal(Param& p, double stddev, Rng& rng);
void init_uniform(Param& p, double limit, Rng& rng);
// He-style fan-in scaling for conv/linear weights feeding a GELU.
void init_fan_in(Param& p, int64_t fan_in, Rng& rng);

}  // namespace revoice::nn

#endif  // REVOICE_NN_PARAM_H_
