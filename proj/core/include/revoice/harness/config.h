// core/include/revoice/harness/config.h
#ifndef REVOICE_HARNESS_CONFIG_H_
#define REVOICE_HARNESS_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

namespace revoice::harness {

// One JSON config drives every CLI verb; each flag overrides its key.
struct ExperimentConfig {
  uint64_t seed = 1;

  // evaluation / adaptation SNR grids (dB)
  std::vector<double> snr_grid = {5, 10, 15, 20, 25};
  std::vector<double> adapt_snr_grid = {10, 20};

  // model knobs
  int codebook_size = 128;
  int diffusion_steps = 30;
  double guidance_w = 1.0;
  bool no_vq = false;     // ablation: dense features through the content path
  bool skip_ns = false;   // ablation: restoration-only, content from raw mixture

  // paths
  std::string corpus_manifest;
  std::string noise_dir;
  std::string work_dir = "work";
  std::string ns_ckpt;
  std::string vc_ckpt;
  std::string speaker_ckpt;  // embedder for SECS scoring (any vc checkpoint)

  // training
  int ns_epochs = 25;
  int vc_epochs = 25;
  int adapt_epochs = 10;
  int speaker_epochs = 15;
  int batch_size = 4;
  double ns_lr = 2e-4;
  double vc_lr = 3e-4;
  int ns_channels = 32;
  int ns_depth = 4;
  int content_dim = 48;
  int model_dim = 64;
  int score_channels = 48;
  double adapt_enhanced_fraction = 0.5;  // rest is raw noisy mel
  double adapt_drop_prob = 0.25;          // chance of one ~100 ms drop per item

  // evaluation details
  int griffin_lim_iterations = 32;
  double max_align_lag_seconds = 0.06;

  // optional external scorers
  std::string asr_url;
  std::string mos_url;

  void check() const;  // grid nonempty etc.
};

ExperimentConfig load_experiment_config(const std::string& path);
void save_experiment_config(const std::string& path, const ExperimentConfig& config);

}  // namespace revoice::harness

#endif  // REVOICE_HARNESS_CONFIG_H_
