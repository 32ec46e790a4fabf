// core/include/revoice/vc/content.h
#ifndef REVOICE_VC_CONTENT_H_
#define REVOICE_VC_CONTENT_H_

#include <Eigen/Core>
#include <vector>

#include "revoice/base/rng.h"
#include "revoice/mel.h"
#include "revoice/nn/param.h"

namespace revoice::vc {

// Per-frame discrete codes plus the pre-quantization encoder features.
struct ContentCodes {
  std::vector<int> indices;      // one per mel frame, each < codebook_size
  Eigen::MatrixXd features;      // [frames x content_dim]
  int codebook_size = 0;
  int frame_hop = kHop;          // carried so projections keep the framing
  int sample_rate = kPipelineRate;
};

// The coarse spectrogram: content projected back to 64 mel bands.
struct CoarseSpectrogram {
  MelSpectrogram values;
};

// Nearest-neighbor codebook with EMA updates and dead-code reseeding.
// Backed by named buffers in a ParamStore so it checkpoints with the model:
//   vq.codebook    [K x d]
//   vq.cluster_ema [K x 1]
//   vq.embed_ema   [K x d]
//   vq.usage       [K x 1]   cumulative assignment counts
class VectorQuantizer {
 public:
  VectorQuantizer() = default;
  VectorQuantizer(nn::ParamStore* store, int codebook_size, int dim);

  static void create_buffers(nn::ParamStore& store, int codebook_size, int dim, Rng& rng);
  void attach(nn::ParamStore* store);

  // Nearest codeword per feature row (L2).
  std::vector<int> assign(const Eigen::MatrixXd& features) const;
  Eigen::MatrixXd codewords(const std::vector<int>& ids) const;

  // EMA codebook update from one batch of features + assignments. Codes that
  // stay unused for many updates are reseeded from random batch rows.
  void ema_update(const Eigen::MatrixXd& features, const std::vector<int>& ids, Rng& rng);

  // exp(entropy) of the usage histogram of one assignment pass.
  double perplexity(const std::vector<int>& ids) const;

  const Eigen::MatrixXd& codebook() const;
  Eigen::VectorXd usage_counts() const;
  int size() const { return codebook_size_; }
  int dim() const { return dim_; }

 private:
  nn::ParamStore* store_ = nullptr;
  int codebook_size_ = 0;
  int dim_ = 0;
  double decay_ = 0.99;
  double eps_ = 1e-5;
};

}  // namespace revoice::vc

#endif  // REVOICE_VC_CONTENT_H_
