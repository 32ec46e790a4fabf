// core/src/vc/model.cc
#include "revoice/vc/model.h"

#include <cmath>

#include <json.hpp>

#include "revoice/base/error.h"
#include "revoice/nn/checkpoint.h"

using nlohmann::json;

namespace revoice::vc {

namespace {

constexpr double kInShift = 5.0;
constexpr double kInScale = 1.0 / 3.0;
constexpr int kTimeEmbFeatures = 32;  // 16 sin/cos pairs
constexpr int kTimeEmbDim = 64;

void create_conv(nn::ParamStore& ps, const std::string& name, int k, int cin, int cout,
                 Rng& rng, bool zero = false) {
  nn::Param& w = ps.create(name + ".w", static_cast<int64_t>(k) * cin, cout);
  ps.create(name + ".b", 1, cout);
  if (!zero) nn::init_fan_in(w, static_cast<int64_t>(k) * cin, rng);
}

void create_linear(nn::ParamStore& ps, const std::string& name, int in, int out, Rng& rng,
                   bool zero = false) {
  nn::Param& w = ps.create(name + ".w", in, out);
  ps.create(name + ".b", 1, out);
  if (!zero) nn::init_fan_in(w, in, rng);
}

void create_layer_norm(nn::ParamStore& ps, const std::string& name, int dim) {
  ps.create(name + ".g", 1, dim).value.setOnes();
  ps.create(name + ".b", 1, dim);
}

nn::Tensor conv(nn::Graph& g, nn::ParamStore& ps, const std::string& name, nn::Tensor x, int k) {
  return g.conv1d(x, g.param(ps.get(name + ".w")), g.param(ps.get(name + ".b")), k);
}

nn::Tensor linear(nn::Graph& g, nn::ParamStore& ps, const std::string& name, nn::Tensor x) {
  return g.add_rowvec(g.matmul(x, g.param(ps.get(name + ".w"))), g.param(ps.get(name + ".b")));
}

nn::Tensor layer_norm(nn::Graph& g, nn::ParamStore& ps, const std::string& name, nn::Tensor x) {
  return g.layer_norm(x, g.param(ps.get(name + ".g")), g.param(ps.get(name + ".b")));
}

// Affine that brings log-mel values near unit scale before any network stem.
nn::Tensor normalize_mel(nn::Graph& g, nn::Tensor mel) {
  return g.add(g.scale(mel, kInScale),
               g.constant(nn::Mat::Constant(mel.rows(), mel.cols(), kInShift * kInScale)));
}

nn::Mat sinusoidal_rows(int64_t t, int dim) {
  nn::Mat pos(t, dim);
  for (int64_t i = 0; i < t; ++i) {
    for (int j = 0; j < dim / 2; ++j) {
      const double w = std::pow(10000.0, -2.0 * j / dim);
      pos(i, 2 * j) = std::sin(w * static_cast<double>(i));
      pos(i, 2 * j + 1) = std::cos(w * static_cast<double>(i));
    }
  }
  return pos;
}

nn::Mat time_embedding_features(double t) {
  nn::Mat row(1, kTimeEmbFeatures);
  for (int j = 0; j < kTimeEmbFeatures / 2; ++j) {
    const double w = std::pow(1000.0, 2.0 * j / kTimeEmbFeatures);
    row(0, 2 * j) = std::sin(w * t);
    row(0, 2 * j + 1) = std::cos(w * t);
  }
  return row;
}

int score_level_channels(const VcConfig& c, int level) {
  return std::min(c.score_channels << level, c.score_channels * 8);
}

}  // namespace

std::string to_string(TrainStage stage) {
  return stage == TrainStage::kClean ? "clean" : "adapted";
}

TrainStage train_stage_from_string(const std::string& s) {
  if (s == "clean") return TrainStage::kClean;
  if (s == "adapted") return TrainStage::kAdapted;
  throw ModelError("unknown train stage: " + s);
}

VcModel VcModel::create(const VcConfig& config) {
  if (config.mel_bands != 64) throw ModelError("vc: mel_bands is fixed at 64");
  if (config.model_dim % config.heads != 0) {
    throw ModelError("vc: model_dim must be divisible by heads");
  }
  config.schedule.check();

  VcModel m;
  m.config_ = config;
  Rng rng(config.seed);
  nn::ParamStore& ps = m.params_;

  // content encoder (the frozen-HuBERT stand-in, trained jointly here)
  create_conv(ps, "content.c1", 3, config.mel_bands, config.content_dim, rng);
  create_conv(ps, "content.c2", 3, config.content_dim, config.content_dim, rng);
  create_conv(ps, "content.c3", 1, config.content_dim, config.content_dim, rng);

  // vector quantizer buffers
  VectorQuantizer::create_buffers(ps, config.codebook_size, config.content_dim, rng);
  m.vq_.attach(&ps);

  // transformer content encoder + linear projection to the coarse spectrogram
  create_linear(ps, "trans.in", config.content_dim, config.model_dim, rng);
  for (int l = 0; l < config.layers; ++l) {
    const std::string p = "trans.l" + std::to_string(l);
    create_layer_norm(ps, p + ".ln1", config.model_dim);
    create_linear(ps, p + ".attn.q", config.model_dim, config.model_dim, rng);
    create_linear(ps, p + ".attn.k", config.model_dim, config.model_dim, rng);
    create_linear(ps, p + ".attn.v", config.model_dim, config.model_dim, rng);
    create_linear(ps, p + ".attn.o", config.model_dim, config.model_dim, rng);
    create_layer_norm(ps, p + ".ln2", config.model_dim);
    create_linear(ps, p + ".ffn.1", config.model_dim, 2 * config.model_dim, rng);
    create_linear(ps, p + ".ffn.2", 2 * config.model_dim, config.model_dim, rng);
  }
  create_layer_norm(ps, "trans.ln", config.model_dim);
  create_linear(ps, "proj.out", config.model_dim, config.mel_bands, rng);

  // speaker encoder + classification head
  create_conv(ps, "spk.c1", 3, config.mel_bands, 64, rng);
  create_conv(ps, "spk.c2", 3, 64, 64, rng);
  create_linear(ps, "spk.out", 64, config.speaker_dim, rng);
  create_linear(ps, "spkcls", config.speaker_dim, std::max(config.num_speakers, 2), rng);

  // score U-Net
  create_linear(ps, "score.temb.1", kTimeEmbFeatures, kTimeEmbDim, rng);
  create_linear(ps, "score.temb.2", kTimeEmbDim, kTimeEmbDim, rng);
  auto create_score_block = [&](const std::string& name, int cin, int cout) {
    create_conv(ps, name + ".c1", 3, cin, cout, rng);
    create_conv(ps, name + ".c2", 3, cout, cout, rng);
    if (cin != cout) create_conv(ps, name + ".skip", 1, cin, cout, rng);
    create_linear(ps, name + ".ft", kTimeEmbDim, cout, rng);
    create_linear(ps, name + ".fs", config.speaker_dim, cout, rng);
  };
  create_conv(ps, "score.stem", 3, 2 * config.mel_bands, config.score_channels, rng);
  int ch = config.score_channels;
  for (int d = 0; d < config.score_depth; ++d) {
    const int out = score_level_channels(config, d);
    create_score_block("score.down" + std::to_string(d), ch, out);
    ch = out;
  }
  create_score_block("score.mid", ch, ch);
  for (int d = config.score_depth - 1; d >= 0; --d) {
    const int skip_ch = score_level_channels(config, d);
    const int out = d > 0 ? score_level_channels(config, d - 1) : config.score_channels;
    create_score_block("score.up" + std::to_string(d), skip_ch + ch, out);
    ch = out;
  }
  create_conv(ps, "score.head", 3, ch, config.mel_bands, rng, /*zero=*/true);
  return m;
}

nn::Tensor VcModel::content_features_g(nn::Graph& g, nn::Tensor mel) {
  nn::Tensor x = normalize_mel(g, mel);
  x = g.gelu(conv(g, params_, "content.c1", x, 3));
  x = g.gelu(conv(g, params_, "content.c2", x, 3));
  return conv(g, params_, "content.c3", x, 1);
}

nn::Tensor VcModel::project_g(nn::Graph& g, nn::Tensor features) {
  const int64_t t = features.rows();
  const int dm = config_.model_dim;
  const int nh = config_.heads;
  const int dh = dm / nh;

  nn::Tensor h = linear(g, params_, "trans.in", features);
  h = g.add(h, g.constant(sinusoidal_rows(t, dm)));

  for (int l = 0; l < config_.layers; ++l) {
    const std::string p = "trans.l" + std::to_string(l);
    // pre-norm multi-head self-attention
    nn::Tensor x = layer_norm(g, params_, p + ".ln1", h);
    nn::Tensor q = linear(g, params_, p + ".attn.q", x);
    nn::Tensor k = linear(g, params_, p + ".attn.k", x);
    nn::Tensor v = linear(g, params_, p + ".attn.v", x);
    nn::Tensor heads_out;
    for (int hd = 0; hd < nh; ++hd) {
      nn::Tensor qh = g.slice_cols(q, static_cast<int64_t>(hd) * dh, dh);
      nn::Tensor kh = g.slice_cols(k, static_cast<int64_t>(hd) * dh, dh);
      nn::Tensor vh = g.slice_cols(v, static_cast<int64_t>(hd) * dh, dh);
      nn::Tensor attn = g.softmax_rows(g.scale(g.matmul_nt(qh, kh), 1.0 / std::sqrt(dh)));
      nn::Tensor oh = g.matmul(attn, vh);
      heads_out = hd == 0 ? oh : g.concat_cols(heads_out, oh);
    }
    h = g.add(h, linear(g, params_, p + ".attn.o", heads_out));
    // pre-norm feed-forward
    nn::Tensor y = layer_norm(g, params_, p + ".ln2", h);
    y = linear(g, params_, p + ".ffn.2", g.gelu(linear(g, params_, p + ".ffn.1", y)));
    h = g.add(h, y);
  }
  h = layer_norm(g, params_, "trans.ln", h);
  return linear(g, params_, "proj.out", h);
}

nn::Tensor VcModel::speaker_embed_g(nn::Graph& g, nn::Tensor mel) {
  nn::Tensor x = normalize_mel(g, mel);
  x = g.gelu(conv(g, params_, "spk.c1", x, 3));
  x = g.gelu(conv(g, params_, "spk.c2", x, 3));
  nn::Tensor pooled = g.mean_rows(x);
  return g.l2_normalize_row(linear(g, params_, "spk.out", pooled));
}

nn::Tensor VcModel::speaker_logits_g(nn::Graph& g, nn::Tensor emb) {
  return linear(g, params_, "spkcls", emb);
}

nn::Tensor VcModel::score_g(nn::Graph& g, nn::Tensor mt, double t,
                            std::optional<nn::Tensor> cond_mhat,
                            std::optional<nn::Tensor> cond_spk) {
  const int64_t frames = mt.rows();
  if (mt.cols() != config_.mel_bands) throw ModelError("score: mel band mismatch");

  nn::Tensor mhat_in = cond_mhat ? normalize_mel(g, *cond_mhat)
                                 : g.constant(nn::Mat::Zero(frames, config_.mel_bands));
  nn::Tensor spk = cond_spk ? *cond_spk
                            : g.constant(nn::Mat::Zero(1, config_.speaker_dim));

  nn::Tensor temb = g.constant(time_embedding_features(t));
  temb = linear(g, params_, "score.temb.2", g.gelu(linear(g, params_, "score.temb.1", temb)));

  auto block = [&](const std::string& name, nn::Tensor x, bool has_skip_conv) {
    nn::Tensor h = conv(g, params_, name + ".c1", x, 3);
    h = g.add_rowvec(h, linear(g, params_, name + ".ft", temb));
    h = g.add_rowvec(h, linear(g, params_, name + ".fs", spk));
    h = g.gelu(h);
    h = conv(g, params_, name + ".c2", h, 3);
    nn::Tensor skip = has_skip_conv ? conv(g, params_, name + ".skip", x, 1) : x;
    return g.gelu(g.add(h, skip));
  };

  nn::Tensor h = conv(g, params_, "score.stem",
                      g.concat_cols(normalize_mel(g, mt), mhat_in), 3);
  std::vector<nn::Tensor> skips;
  int ch = config_.score_channels;
  for (int d = 0; d < config_.score_depth; ++d) {
    const int out = score_level_channels(config_, d);
    h = block("score.down" + std::to_string(d), h, ch != out);
    skips.push_back(h);
    h = g.avg_pool_rows2(h);
    ch = out;
  }
  h = block("score.mid", h, false);
  for (int d = config_.score_depth - 1; d >= 0; --d) {
    h = g.upsample_rows2(h, skips[static_cast<size_t>(d)].rows());
    h = g.concat_cols(skips[static_cast<size_t>(d)], h);
    h = block("score.up" + std::to_string(d), h, true);
  }
  return conv(g, params_, "score.head", h, 3);
}

ContentCodes VcModel::content_encode(const MelSpectrogram& mel) {
  if (mel.bands() != config_.mel_bands) throw DataError("content_encode: mel band mismatch");
  nn::Graph g;
  nn::Tensor f = content_features_g(g, g.constant(mel.values));
  ContentCodes codes;
  codes.features = f.value();
  codes.indices = vq_.assign(codes.features);
  codes.codebook_size = config_.codebook_size;
  codes.frame_hop = mel.frame_hop;
  codes.sample_rate = mel.sample_rate;
  return codes;
}

CoarseSpectrogram VcModel::project_content(const ContentCodes& codes) {
  if (codes.features.rows() != static_cast<int64_t>(codes.indices.size())) {
    throw DataError("project_content: indices/features length mismatch");
  }
  nn::Graph g;
  const nn::Mat in = config_.use_vq ? vq_.codewords(codes.indices) : codes.features;
  nn::Tensor mhat = project_g(g, g.constant(in));
  CoarseSpectrogram out;
  out.values.values = mhat.value();
  out.values.frame_hop = codes.frame_hop;
  out.values.sample_rate = codes.sample_rate;
  return out;
}

SpeakerEmbedding VcModel::speaker_encode(const MelSpectrogram& ref_mel) {
  const double seconds = static_cast<double>(ref_mel.frames()) * ref_mel.frame_hop /
                         std::max(ref_mel.sample_rate, 1);
  if (seconds < 1.0) {
    throw DataError("speaker_encode: reference must be at least 1 second, got " +
                    std::to_string(seconds) + " s");
  }
  nn::Graph g;
  nn::Tensor e = speaker_embed_g(g, g.constant(ref_mel.values));
  SpeakerEmbedding emb;
  emb.vector = e.value().row(0).transpose();
  return emb;
}

SpeakerEmbedding VcModel::speaker_encode(const Waveform& ref) {
  if (ref.duration_seconds() < 1.0) {
    throw DataError("speaker_encode: reference must be at least 1 second, got " +
                    std::to_string(ref.duration_seconds()) + " s");
  }
  return speaker_encode(mel_analyze(ref));
}

Mat VcModel::score_values(const Mat& mt, double t, const Mat* cond_mhat,
                          const SpeakerEmbedding* cond_spk) {
  nn::Graph g;
  std::optional<nn::Tensor> mc, sc;
  if (cond_mhat != nullptr) mc = g.constant(*cond_mhat);
  if (cond_spk != nullptr) sc = g.constant(cond_spk->vector.transpose());
  return score_g(g, g.constant(mt), t, mc, sc).value();
}

void VcModel::freeze_speaker() {
  for (nn::Param* p : params_.with_prefix("spk")) p->trainable = false;
}

std::vector<nn::Param*> VcModel::content_path_params() {
  std::vector<nn::Param*> out;
  for (const char* prefix : {"content.", "trans.", "proj."}) {
    for (nn::Param* p : params_.with_prefix(prefix)) {
      if (p->trainable) out.push_back(p);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// losses

double encoder_loss(const CoarseSpectrogram& mhat, const MelSpectrogram& m0) {
  if (mhat.values.values.rows() != m0.values.rows() ||
      mhat.values.values.cols() != m0.values.cols()) {
    throw DataError("encoder_loss: shape mismatch");
  }
  return (mhat.values.values - m0.values).cwiseAbs().mean();
}

double noise_robust_loss(const CoarseSpectrogram& mhat_vc, const MelSpectrogram& m0) {
  return encoder_loss(mhat_vc, m0);
}

double total_loss(TotalLossMode mode, double l_d, double l_enc, double l_nr, double alpha) {
  if (mode == TotalLossMode::kCleanStage) return l_d + alpha * l_enc;
  return l_d + alpha * (l_enc + l_nr);
}

double diffusion_loss(VcModel& model, const MelSpectrogram& m0, const CoarseSpectrogram& mhat,
                      const SpeakerEmbedding& s, Rng& rng, DiffusionLossStats* stats) {
  const auto& sched = model.config().schedule;
  const double t = sched.t_min + (1.0 - sched.t_min) * rng.uniform();
  ForwardSample fwd = forward_diffuse(m0.values, mhat.values.values, t, sched, rng);
  const bool drop_s = rng.uniform() < model.config().cfg_dropout;
  const bool drop_m = rng.uniform() < model.config().cfg_dropout;
  if (stats != nullptr) {
    ++stats->draws;
    if (drop_s) ++stats->speaker_dropped;
    if (drop_m) ++stats->content_dropped;
  }
  const Mat pred = model.score_values(fwd.mt, t, drop_m ? nullptr : &mhat.values.values,
                                      drop_s ? nullptr : &s);
  const double loss = (pred + fwd.eps).squaredNorm();
  if (!std::isfinite(loss)) throw ModelError("diffusion_loss: non-finite loss");
  return loss;
}

// ---------------------------------------------------------------------------
// training

VcTrainState make_vc_train_state(const VcConfig& config) {
  VcTrainState state;
  state.model = VcModel::create(config);
  state.opt = nn::Adam(config.lr);
  state.rng_seed = config.seed;
  return state;
}

double speaker_train_step(VcTrainState& state,
                          const std::vector<std::pair<const MelSpectrogram*, int>>& batch) {
  if (batch.empty()) throw DataError("speaker_train_step: empty batch");
  const double inv = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const auto& [mel, label] : batch) {
    nn::Graph g;
    nn::Tensor emb = state.model.speaker_embed_g(g, g.constant(mel->values));
    nn::Tensor loss = g.cross_entropy_logits(state.model.speaker_logits_g(g, emb), label);
    total += loss.value()(0, 0) * inv;
    g.backward(loss, inv);
  }
  if (!std::isfinite(total)) {
    throw ModelError("speaker_train_step: non-finite loss at step " + std::to_string(state.step));
  }
  std::vector<nn::Param*> params;
  for (const char* prefix : {"spk.", "spkcls"}) {
    for (nn::Param* p : state.model.params().with_prefix(prefix)) params.push_back(p);
  }
  state.opt.step(params);
  state.model.params().zero_grad();
  ++state.step;
  return total;
}

namespace {

// Builds the in-graph content path: features -> (optional straight-through
// VQ + commitment) -> projection. Returns (Mhat tensor, commitment tensor or
// invalid, assignments, feature values).
struct ContentPathOut {
  nn::Tensor mhat;
  nn::Tensor commit;  // invalid tensor when VQ is off
  std::vector<int> ids;
  Mat features;
};

ContentPathOut content_path_g(VcModel& model, nn::Graph& g, nn::Tensor mel_const) {
  ContentPathOut out;
  nn::Tensor f = model.content_features_g(g, mel_const);
  out.features = f.value();
  out.ids = model.vq().assign(out.features);
  if (model.config().use_vq) {
    const Mat cw = model.vq().codewords(out.ids);
    // straight-through: value is the codeword, gradient flows to features
    nn::Tensor q = g.add(f, g.constant(cw - out.features));
    const double numel = static_cast<double>(out.features.size());
    out.commit = g.scale(g.sum_sq(g.sub(f, g.constant(cw))),
                         model.config().commitment / numel);
    out.mhat = model.project_g(g, q);
  } else {
    out.mhat = model.project_g(g, f);
  }
  return out;
}

}  // namespace

VcItemResult vc_item_objective(VcModel& model, const MelSpectrogram& m0,
                               const MelSpectrogram* degraded, uint64_t draw_seed,
                               double grad_scale) {
  const auto& cfg = model.config();
  const auto& sched = cfg.schedule;
  Rng draw(draw_seed);

  nn::Graph g;
  nn::Tensor m0c = g.constant(m0.values);

  // clean content path -> L_enc
  ContentPathOut clean_path = content_path_g(model, g, m0c);
  nn::Tensor l_enc = g.mean_abs(g.sub(clean_path.mhat, m0c));

  VcItemResult result;
  result.ids_clean = clean_path.ids;
  result.features_clean = clean_path.features;

  // degraded content path -> L_nr; also becomes the diffusion conditioning
  // during adaptation so the decoder sees what inference will feed it.
  nn::Tensor cond_source = clean_path.mhat;
  nn::Tensor l_nr;
  ContentPathOut degraded_path;
  if (degraded != nullptr) {
    if (degraded->values.rows() != m0.values.rows()) {
      throw DataError("vc adaptation: clean/degraded frame counts differ");
    }
    degraded_path = content_path_g(model, g, g.constant(degraded->values));
    l_nr = g.mean_abs(g.sub(degraded_path.mhat, m0c));
    cond_source = degraded_path.mhat;
    result.ids_degraded = degraded_path.ids;
    result.features_degraded = degraded_path.features;
  }

  // speaker embedding from the clean utterance
  nn::Tensor spk = model.speaker_embed_g(g, m0c);

  // diffusion draw
  const double t = sched.t_min + (1.0 - sched.t_min) * draw.uniform();
  Mat eps(m0.values.rows(), m0.values.cols());
  for (int64_t j = 0; j < eps.cols(); ++j) {
    for (int64_t i = 0; i < eps.rows(); ++i) eps(i, j) = draw.normal();
  }
  const double c = sched.mean_coeff(t);
  nn::Tensor eps_c = g.constant(eps);
  nn::Tensor mt = g.add(g.add_scaled(cond_source, 1.0 - c, m0c, c),
                        g.scale(eps_c, sched.sigma(t)));

  result.speaker_dropped = draw.uniform() < cfg.cfg_dropout;
  result.content_dropped = draw.uniform() < cfg.cfg_dropout;
  std::optional<nn::Tensor> cond_m, cond_s;
  if (!result.content_dropped) cond_m = cond_source;
  if (!result.speaker_dropped) cond_s = spk;

  nn::Tensor pred = model.score_g(g, mt, t, cond_m, cond_s);
  nn::Tensor l_d = g.sum_sq(g.add(pred, eps_c));

  nn::Tensor objective = g.add_scalars(l_d, 1.0, l_enc, cfg.alpha);
  if (degraded != nullptr) objective = g.add_scalars(objective, 1.0, l_nr, cfg.alpha);
  if (clean_path.commit.valid()) objective = g.add_scalars(objective, 1.0, clean_path.commit, 1.0);
  if (degraded != nullptr && degraded_path.commit.valid()) {
    objective = g.add_scalars(objective, 1.0, degraded_path.commit, 1.0);
  }

  result.objective = objective.value()(0, 0);
  result.l_d = l_d.value()(0, 0);
  result.l_enc = l_enc.value()(0, 0);
  result.l_nr = l_nr.valid() ? l_nr.value()(0, 0) : 0.0;
  if (!std::isfinite(result.objective)) {
    throw ModelError("vc objective: non-finite loss");
  }
  if (grad_scale != 0.0) g.backward(objective, grad_scale);
  return result;
}

double vc_train_step(VcTrainState& state, const std::vector<const MelSpectrogram*>& batch,
                     Rng& rng, DiffusionLossStats* stats) {
  if (batch.empty()) throw DataError("vc_train_step: empty batch");
  if (state.stage != TrainStage::kClean) {
    throw ModelError("vc_train_step: state is already adapted; use vc_adapt_step");
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const MelSpectrogram* m0 : batch) {
    VcItemResult r = vc_item_objective(state.model, *m0, nullptr, rng.raw(), inv);
    total += r.objective * inv;
    if (stats != nullptr) {
      ++stats->draws;
      if (r.speaker_dropped) ++stats->speaker_dropped;
      if (r.content_dropped) ++stats->content_dropped;
    }
    if (state.model.config().use_vq) {
      state.model.vq().ema_update(r.features_clean, r.ids_clean, rng);
    }
  }
  state.opt.step(state.model.params().trainable());
  state.model.params().zero_grad();
  ++state.step;
  return total;
}

double vc_adapt_step(VcTrainState& state, const std::vector<AdaptItem>& batch, Rng& rng) {
  if (batch.empty()) throw DataError("vc_adapt_step: empty batch");
  const double inv = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const AdaptItem& item : batch) {
    VcItemResult r = vc_item_objective(state.model, *item.clean, item.degraded, rng.raw(), inv);
    total += r.objective * inv;
    if (state.model.config().use_vq) {
      state.model.vq().ema_update(r.features_degraded, r.ids_degraded, rng);
    }
  }
  // only the content path moves; decoder and speaker encoder stay fixed
  state.opt.step(state.model.content_path_params());
  state.model.params().zero_grad();
  state.stage = TrainStage::kAdapted;
  ++state.step;
  return total;
}

// ---------------------------------------------------------------------------
// inference

MelSpectrogram restore_mel(VcModel& model, const MelSpectrogram& input_mel,
                           const SpeakerEmbedding& speaker, const RestoreOptions& options) {
  if (std::abs(speaker.norm() - 1.0) > 1e-6) {
    throw DataError("restore: speaker embedding must be unit norm");
  }
  ContentCodes codes = model.content_encode(input_mel);
  CoarseSpectrogram coarse = model.project_content(codes);
  const Mat& mhat = coarse.values.values;

  const double w = options.guidance_w;
  ScoreFn score = [&](const Mat& x, double t) {
    Mat cond = model.score_values(x, t, &mhat, &speaker);
    if (w == 0.0) return cond;
    Mat uncond = model.score_values(x, t, nullptr, nullptr);
    return Mat((1.0 + w) * cond - w * uncond);
  };

  Rng rng(options.seed);
  MelSpectrogram out;
  out.values = reverse_sde_sample(score, mhat, model.config().schedule, options.steps, rng);
  out.frame_hop = input_mel.frame_hop;
  out.sample_rate = input_mel.sample_rate;
  return out;
}

Waveform restore(VcModel& model, const MelSpectrogram& input_mel, const Waveform& speaker_ref,
                 const RestoreOptions& options) {
  const SpeakerEmbedding speaker = model.speaker_encode(speaker_ref);
  MelSpectrogram mel = restore_mel(model, input_mel, speaker, options);
  return mel_invert(mel, options.griffin_lim_iterations);
}

// ---------------------------------------------------------------------------
// checkpoints

void save_vc_checkpoint(const std::string& path, const VcTrainState& state) {
  const VcConfig& c = state.model.config();
  json meta;
  meta["kind"] = "vc";
  meta["stage"] = to_string(state.stage);
  meta["config"] = {{"mel_bands", c.mel_bands},
                    {"content_dim", c.content_dim},
                    {"model_dim", c.model_dim},
                    {"heads", c.heads},
                    {"layers", c.layers},
                    {"codebook_size", c.codebook_size},
                    {"speaker_dim", c.speaker_dim},
                    {"score_channels", c.score_channels},
                    {"score_depth", c.score_depth},
                    {"num_speakers", c.num_speakers},
                    {"lr", c.lr},
                    {"alpha", c.alpha},
                    {"commitment", c.commitment},
                    {"cfg_dropout", c.cfg_dropout},
                    {"use_vq", c.use_vq},
                    {"seed", c.seed},
                    {"beta0", c.schedule.beta0},
                    {"beta1", c.schedule.beta1},
                    {"t_min", c.schedule.t_min}};
  meta["step"] = state.step;
  meta["opt_steps"] = state.opt.steps_taken();
  meta["rng_seed"] = state.rng_seed;
  nn::save_checkpoint(path, meta.dump(), state.model.params());
}

VcTrainState load_vc_checkpoint(const std::string& path) {
  nn::ParamStore loaded;
  const std::string meta_str = nn::load_checkpoint(path, loaded);
  json meta = json::parse(meta_str);
  if (meta.value("kind", "") != "vc") throw ModelError("not a vc checkpoint: " + path);

  VcConfig c;
  const json& jc = meta.at("config");
  c.mel_bands = jc.value("mel_bands", 64);
  c.content_dim = jc.value("content_dim", 48);
  c.model_dim = jc.value("model_dim", 64);
  c.heads = jc.value("heads", 2);
  c.layers = jc.value("layers", 2);
  c.codebook_size = jc.value("codebook_size", 128);
  c.speaker_dim = jc.value("speaker_dim", 128);
  c.score_channels = jc.value("score_channels", 48);
  c.score_depth = jc.value("score_depth", 2);
  c.num_speakers = jc.value("num_speakers", 4);
  c.lr = jc.value("lr", 3e-4);
  c.alpha = jc.value("alpha", 0.1);
  c.commitment = jc.value("commitment", 0.25);
  c.cfg_dropout = jc.value("cfg_dropout", 0.1);
  c.use_vq = jc.value("use_vq", true);
  c.seed = jc.value("seed", uint64_t{7});
  c.schedule.beta0 = jc.value("beta0", 0.05);
  c.schedule.beta1 = jc.value("beta1", 20.0);
  c.schedule.t_min = jc.value("t_min", 1e-4);

  VcTrainState state;
  state.model = VcModel::create(c);
  for (nn::Param* p : state.model.params().all()) {
    const nn::Param& src = loaded.get(p->name);
    if (src.value.rows() != p->value.rows() || src.value.cols() != p->value.cols()) {
      throw ModelError("vc checkpoint shape mismatch for " + p->name + ": " + path);
    }
    p->value = src.value;
    p->m = src.m;
    p->v = src.v;
    p->trainable = src.trainable;
  }
  state.stage = train_stage_from_string(meta.value("stage", "clean"));
  state.step = meta.value("step", int64_t{0});
  state.opt = nn::Adam(c.lr);
  state.opt.set_steps_taken(meta.value("opt_steps", int64_t{0}));
  state.rng_seed = meta.value("rng_seed", uint64_t{7});
  return state;
}

}  // namespace revoice::vc
