// core/include/revoice/ns/model.h
#ifndef REVOICE_NS_MODEL_H_
#define REVOICE_NS_MODEL_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "revoice/audio.h"
#include "revoice/mel.h"
#include "revoice/nn/adam.h"
#include "revoice/nn/graph.h"

namespace revoice::ns {

struct NsConfig {
  int channels = 32;   // stem width; doubles per level, capped at 8x
  int depth = 4;       // down/up levels
  int mel_bands = 64;
  double lr = 2e-4;
  uint64_t seed = 1;
};

// ResU-Net over log-Mel frames predicting an additive residual. The output
// head is zero-initialized, so a fresh model is exactly the identity.
class NsModel {
 public:
  NsModel() = default;
  static NsModel create(const NsConfig& config);

  // Graph forward of the residual head, [T x mel_bands] in, same shape out.
  nn::Tensor residual(nn::Graph& g, nn::Tensor mel);

  // Plain residual on values.
  Eigen::MatrixXd residual(const Eigen::MatrixXd& mel);

  const NsConfig& config() const { return config_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }
  int64_t parameter_count() const { return params_.parameter_count(); }

  // Hook for the additivity contract test: zeroes the head so residual == 0.
  void zero_head();

 private:
  NsConfig config_;
  nn::ParamStore params_;
};

// output = noisy_mel + residual(noisy_mel), elementwise in the log-Mel domain.
MelSpectrogram ns_forward(NsModel& model, const MelSpectrogram& noisy_mel);

struct NsTrainState {
  NsModel model;
  nn::Adam opt;
  int64_t step = 0;
  uint64_t rng_seed = 1;
};

NsTrainState make_ns_train_state(const NsConfig& config);

// One optimizer update on paired (noisy, clean) mels. Returns the batch loss
// mean |ns_forward(noisy) - clean|. Throws ModelError on non-finite loss.
double ns_train_step(NsTrainState& state,
                     const std::vector<std::pair<const MelSpectrogram*, const MelSpectrogram*>>& batch);

// wav in -> (enhanced wav via Griffin-Lim, enhanced mel). The mel output is
// what feeds the restoration stage.
std::pair<Waveform, MelSpectrogram> ns_enhance(NsModel& model, const Waveform& noisy,
                                               int griffin_lim_iterations = 32);

void save_ns_checkpoint(const std::string& path, const NsTrainState& state);
NsTrainState load_ns_checkpoint(const std::string& path);

}  // namespace revoice::ns

#endif  // REVOICE_NS_MODEL_H_
