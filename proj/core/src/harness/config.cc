// core/src/harness/config.cc
#include "revoice/harness/config.h"

#include <fstream>

#include <json.hpp>

#include "revoice/base/error.h"

using nlohmann::json;

namespace revoice::harness {

void ExperimentConfig::check() const {
  if (snr_grid.empty()) throw DataError("config: snr_grid must be nonempty");
  if (adapt_snr_grid.empty()) throw DataError("config: adapt_snr_grid must be nonempty");
  if (batch_size < 1) throw DataError("config: batch_size must be >= 1");
  if (diffusion_steps < 1) throw DataError("config: diffusion_steps must be >= 1");
  if (adapt_enhanced_fraction < 0.0 || adapt_enhanced_fraction > 1.0) {
    throw DataError("config: adapt_enhanced_fraction must be in [0, 1]");
  }
}

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& field) {
  if (j.contains(key) && !j[key].is_null()) field = j[key].get<T>();
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad config json: ") + e.what());
  }

  ExperimentConfig c;
  maybe(j, "seed", c.seed);
  maybe(j, "snr_grid", c.snr_grid);
  maybe(j, "adapt_snr_grid", c.adapt_snr_grid);
  maybe(j, "codebook_size", c.codebook_size);
  maybe(j, "diffusion_steps", c.diffusion_steps);
  maybe(j, "guidance_w", c.guidance_w);
  maybe(j, "no_vq", c.no_vq);
  maybe(j, "skip_ns", c.skip_ns);
  maybe(j, "corpus_manifest", c.corpus_manifest);
  maybe(j, "noise_dir", c.noise_dir);
  maybe(j, "work_dir", c.work_dir);
  maybe(j, "ns_ckpt", c.ns_ckpt);
  maybe(j, "vc_ckpt", c.vc_ckpt);
  maybe(j, "speaker_ckpt", c.speaker_ckpt);
  maybe(j, "ns_epochs", c.ns_epochs);
  maybe(j, "vc_epochs", c.vc_epochs);
  maybe(j, "adapt_epochs", c.adapt_epochs);
  maybe(j, "speaker_epochs", c.speaker_epochs);
  maybe(j, "batch_size", c.batch_size);
  maybe(j, "ns_lr", c.ns_lr);
  maybe(j, "vc_lr", c.vc_lr);
  maybe(j, "ns_channels", c.ns_channels);
  maybe(j, "ns_depth", c.ns_depth);
  maybe(j, "content_dim", c.content_dim);
  maybe(j, "model_dim", c.model_dim);
  maybe(j, "score_channels", c.score_channels);
  maybe(j, "adapt_enhanced_fraction", c.adapt_enhanced_fraction);
  maybe(j, "adapt_drop_prob", c.adapt_drop_prob);
  maybe(j, "griffin_lim_iterations", c.griffin_lim_iterations);
  maybe(j, "max_align_lag_seconds", c.max_align_lag_seconds);
  maybe(j, "asr_url", c.asr_url);
  maybe(j, "mos_url", c.mos_url);
  c.check();
  return c;
}

void save_experiment_config(const std::string& path, const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["snr_grid"] = c.snr_grid;
  j["adapt_snr_grid"] = c.adapt_snr_grid;
  j["codebook_size"] = c.codebook_size;
  j["diffusion_steps"] = c.diffusion_steps;
  j["guidance_w"] = c.guidance_w;
  j["no_vq"] = c.no_vq;
  j["skip_ns"] = c.skip_ns;
  j["corpus_manifest"] = c.corpus_manifest;
  j["noise_dir"] = c.noise_dir;
  j["work_dir"] = c.work_dir;
  j["ns_ckpt"] = c.ns_ckpt;
  j["vc_ckpt"] = c.vc_ckpt;
  j["speaker_ckpt"] = c.speaker_ckpt;
  j["ns_epochs"] = c.ns_epochs;
  j["vc_epochs"] = c.vc_epochs;
  j["adapt_epochs"] = c.adapt_epochs;
  j["speaker_epochs"] = c.speaker_epochs;
  j["batch_size"] = c.batch_size;
  j["ns_lr"] = c.ns_lr;
  j["vc_lr"] = c.vc_lr;
  j["ns_channels"] = c.ns_channels;
  j["ns_depth"] = c.ns_depth;
  j["content_dim"] = c.content_dim;
  j["model_dim"] = c.model_dim;
  j["score_channels"] = c.score_channels;
  j["adapt_enhanced_fraction"] = c.adapt_enhanced_fraction;
  j["adapt_drop_prob"] = c.adapt_drop_prob;
  j["griffin_lim_iterations"] = c.griffin_lim_iterations;
  j["max_align_lag_seconds"] = c.max_align_lag_seconds;
  j["asr_url"] = c.asr_url;
  j["mos_url"] = c.mos_url;

  std::ofstream out(path);
  if (!out) throw DataError("cannot write config: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace revoice::harness
