// core/include/revoice/vc/model.h
#ifndef REVOICE_VC_MODEL_H_
#define REVOICE_VC_MODEL_H_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "revoice/audio.h"
#include "revoice/mel.h"
#include "revoice/nn/adam.h"
#include "revoice/nn/graph.h"
#include "revoice/vc/content.h"
#include "revoice/vc/diffusion.h"
#include "revoice/vc/speaker.h"

namespace revoice::vc {

struct VcConfig {
  int mel_bands = 64;
  int content_dim = 48;     // pre-VQ feature width
  int model_dim = 64;       // transformer width
  int heads = 2;
  int layers = 2;
  int codebook_size = 128;  // configurable up to full scale
  int speaker_dim = 128;
  int score_channels = 48;
  int score_depth = 2;
  int num_speakers = 4;     // classifier head used only while pretraining
  double lr = 3e-4;
  double alpha = 0.1;       // encoder-loss weight in the total objective
  double commitment = 0.25;
  double cfg_dropout = 0.1; // conditioning dropout probability
  bool use_vq = true;       // ablation switch: pass dense features through
  uint64_t seed = 7;
  DiffusionSchedule schedule;
};

enum class TrainStage { kClean, kAdapted };
enum class TotalLossMode { kCleanStage, kAdaptStage };

std::string to_string(TrainStage stage);
TrainStage train_stage_from_string(const std::string& s);

// Content encoder + VQ + transformer projection + speaker encoder + score
// U-Net, all living in one parameter store. Movable, not copyable.
class VcModel {
 public:
  VcModel() = default;
  static VcModel create(const VcConfig& config);

  // ---- graph builders (training and inference share these) ----
  nn::Tensor content_features_g(nn::Graph& g, nn::Tensor mel);
  nn::Tensor project_g(nn::Graph& g, nn::Tensor features);
  nn::Tensor speaker_embed_g(nn::Graph& g, nn::Tensor mel);   // [1 x speaker_dim]
  nn::Tensor speaker_logits_g(nn::Graph& g, nn::Tensor emb);  // [1 x num_speakers]
  // Noise-scale prediction; absent conditioning uses neutral (zero) inputs.
  nn::Tensor score_g(nn::Graph& g, nn::Tensor mt, double t,
                     std::optional<nn::Tensor> cond_mhat, std::optional<nn::Tensor> cond_spk);

  // ---- plain operations ----
  ContentCodes content_encode(const MelSpectrogram& mel);
  CoarseSpectrogram project_content(const ContentCodes& codes);
  SpeakerEmbedding speaker_encode(const MelSpectrogram& ref_mel);
  SpeakerEmbedding speaker_encode(const Waveform& ref);
  Mat score_values(const Mat& mt, double t, const Mat* cond_mhat,
                   const SpeakerEmbedding* cond_spk);

  void freeze_speaker();

  const VcConfig& config() const { return config_; }
  VcConfig& mutable_config() { return config_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }
  VectorQuantizer& vq() { return vq_; }
  // content encoder + transformer + projection (the adaptation target)
  std::vector<nn::Param*> content_path_params();

 private:
  VcConfig config_;
  nn::ParamStore params_;
  VectorQuantizer vq_;
};

// ---- losses ----

// Mean absolute difference between the coarse spectrogram and the clean mel.
double encoder_loss(const CoarseSpectrogram& mhat, const MelSpectrogram& m0);
// Same distance, noisy/enhanced input path.
double noise_robust_loss(const CoarseSpectrogram& mhat_vc, const MelSpectrogram& m0);
// clean stage: L_d + alpha*L_enc; adapt stage: L_d + alpha*(L_enc + L_nr).
double total_loss(TotalLossMode mode, double l_d, double l_enc, double l_nr = 0.0,
                  double alpha = 0.1);

struct DiffusionLossStats {
  int64_t draws = 0;
  int64_t speaker_dropped = 0;
  int64_t content_dropped = 0;
};

// One-draw ||score(Mt, t | Mhat, s) + eps||^2 with conditioning dropout at
// the configured probability, applied independently to s and Mhat.
double diffusion_loss(VcModel& model, const MelSpectrogram& m0, const CoarseSpectrogram& mhat,
                      const SpeakerEmbedding& s, Rng& rng,
                      DiffusionLossStats* stats = nullptr);

// ---- training ----

struct VcTrainState {
  VcModel model;
  nn::Adam opt;
  int64_t step = 0;
  uint64_t rng_seed = 7;
  TrainStage stage = TrainStage::kClean;
};

VcTrainState make_vc_train_state(const VcConfig& config);

// Speaker-classification pretraining step (batch of (mel, speaker label)).
double speaker_train_step(VcTrainState& state,
                          const std::vector<std::pair<const MelSpectrogram*, int>>& batch);

// Per-item training objective with deterministic draws; grad_scale == 0 skips
// the backward pass. Exposed so gradient checks can fix the randomness.
struct VcItemResult {
  double objective = 0.0;
  double l_d = 0.0;
  double l_enc = 0.0;
  double l_nr = 0.0;
  bool speaker_dropped = false;
  bool content_dropped = false;
  std::vector<int> ids_clean;
  Mat features_clean;
  std::vector<int> ids_degraded;
  Mat features_degraded;
};
VcItemResult vc_item_objective(VcModel& model, const MelSpectrogram& m0,
                               const MelSpectrogram* degraded, uint64_t draw_seed,
                               double grad_scale);

// Stage 1: joint content path + score model on clean mels.
double vc_train_step(VcTrainState& state, const std::vector<const MelSpectrogram*>& batch,
                     Rng& rng, DiffusionLossStats* stats = nullptr);

// Stage 2: content path only; the score model and speaker encoder stay fixed.
struct AdaptItem {
  const MelSpectrogram* clean = nullptr;
  const MelSpectrogram* degraded = nullptr;  // raw noisy or NS-enhanced mel
};
double vc_adapt_step(VcTrainState& state, const std::vector<AdaptItem>& batch, Rng& rng);

// ---- inference ----

struct RestoreOptions {
  int steps = 30;
  double guidance_w = 1.0;
  uint64_t seed = 7;
  int griffin_lim_iterations = 32;
};

// content_encode -> project_content -> guided reverse diffusion -> Griffin-Lim.
// The mel overload returns the restored mel before vocoding.
MelSpectrogram restore_mel(VcModel& model, const MelSpectrogram& input_mel,
                           const SpeakerEmbedding& speaker, const RestoreOptions& options);
Waveform restore(VcModel& model, const MelSpectrogram& input_mel, const Waveform& speaker_ref,
                 const RestoreOptions& options);

// ---- checkpoints ----

void save_vc_checkpoint(const std::string& path, const VcTrainState& state);
VcTrainState load_vc_checkpoint(const std::string& path);

}  // namespace revoice::vc

#endif  // REVOICE_VC_MODEL_H_
