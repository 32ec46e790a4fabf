// core/src/ns/model.cc
#include "revoice/ns/model.h"

#include <cmath>

#include <json.hpp>

#include "revoice/base/error.h"
#include "revoice/base/rng.h"
#include "revoice/nn/checkpoint.h"

using nlohmann::json;

namespace revoice::ns {

namespace {

// Mel values live roughly in [log(1e-5), 2]; this affine puts them near N(0,1).
constexpr double kInShift = 5.0;
constexpr double kInScale = 1.0 / 3.0;

int level_channels(const NsConfig& c, int level) {
  return std::min(c.channels << level, c.channels * 8);
}

void create_conv(nn::ParamStore& ps, const std::string& name, int k, int cin, int cout,
                 Rng& rng, bool zero = false) {
  nn::Param& w = ps.create(name + ".w", static_cast<int64_t>(k) * cin, cout);
  ps.create(name + ".b", 1, cout);
  if (!zero) nn::init_fan_in(w, static_cast<int64_t>(k) * cin, rng);
}

nn::Tensor conv(nn::Graph& g, nn::ParamStore& ps, const std::string& name, nn::Tensor x,
                int k) {
  return g.conv1d(x, g.param(ps.get(name + ".w")), g.param(ps.get(name + ".b")), k);
}

void create_resblock(nn::ParamStore& ps, const std::string& name, int cin, int cout, Rng& rng) {
  create_conv(ps, name + ".c1", 3, cin, cout, rng);
  create_conv(ps, name + ".c2", 3, cout, cout, rng);
  if (cin != cout) create_conv(ps, name + ".skip", 1, cin, cout, rng);
}

nn::Tensor resblock(nn::Graph& g, nn::ParamStore& ps, const std::string& name, nn::Tensor x,
                    bool has_skip_conv) {
  nn::Tensor h = g.gelu(conv(g, ps, name + ".c1", x, 3));
  h = conv(g, ps, name + ".c2", h, 3);
  nn::Tensor skip = has_skip_conv ? conv(g, ps, name + ".skip", x, 1) : x;
  return g.gelu(g.add(h, skip));
}

}  // namespace

NsModel NsModel::create(const NsConfig& config) {
  if (config.mel_bands != 64) {
    throw ModelError("ns: mel_bands is fixed at 64, got " + std::to_string(config.mel_bands));
  }
  if (config.channels < 1 || config.depth < 1) {
    throw ModelError("ns: channels and depth must be >= 1");
  }
  NsModel m;
  m.config_ = config;
  Rng rng(config.seed);

  create_conv(m.params_, "ns.stem", 3, config.mel_bands, config.channels, rng);
  int ch = config.channels;
  for (int d = 0; d < config.depth; ++d) {
    const int out = level_channels(config, d);
    create_resblock(m.params_, "ns.down" + std::to_string(d), ch, out, rng);
    ch = out;
  }
  create_resblock(m.params_, "ns.mid", ch, ch, rng);
  for (int d = config.depth - 1; d >= 0; --d) {
    const int skip_ch = level_channels(config, d);
    const int out = d > 0 ? level_channels(config, d - 1) : config.channels;
    create_resblock(m.params_, "ns.up" + std::to_string(d), skip_ch + ch, out, rng);
    ch = out;
  }
  create_conv(m.params_, "ns.head", 3, ch, config.mel_bands, rng, /*zero=*/true);
  return m;
}

void NsModel::zero_head() {
  params_.get("ns.head.w").value.setZero();
  params_.get("ns.head.b").value.setZero();
}

nn::Tensor NsModel::residual(nn::Graph& g, nn::Tensor mel) {
  if (mel.cols() != config_.mel_bands) {
    throw DataError("ns: expected " + std::to_string(config_.mel_bands) + " mel bands, got " +
                    std::to_string(mel.cols()));
  }
  const int64_t t = mel.rows();
  nn::Tensor x = g.add(g.scale(mel, kInScale),
                       g.constant(nn::Mat::Constant(t, config_.mel_bands, kInShift * kInScale)));
  nn::Tensor h = conv(g, params_, "ns.stem", x, 3);

  std::vector<nn::Tensor> skips;
  int ch = config_.channels;
  for (int d = 0; d < config_.depth; ++d) {
    const int out = level_channels(config_, d);
    h = resblock(g, params_, "ns.down" + std::to_string(d), h, ch != out);
    skips.push_back(h);
    h = g.avg_pool_rows2(h);
    ch = out;
  }
  h = resblock(g, params_, "ns.mid", h, false);
  for (int d = config_.depth - 1; d >= 0; --d) {
    h = g.upsample_rows2(h, skips[static_cast<size_t>(d)].rows());
    h = g.concat_cols(skips[static_cast<size_t>(d)], h);
    h = resblock(g, params_, "ns.up" + std::to_string(d), h, true);
  }
  return conv(g, params_, "ns.head", h, 3);
}

Eigen::MatrixXd NsModel::residual(const Eigen::MatrixXd& mel) {
  nn::Graph g;
  nn::Tensor out = residual(g, g.constant(mel));
  return out.value();
}

MelSpectrogram ns_forward(NsModel& model, const MelSpectrogram& noisy_mel) {
  if (noisy_mel.bands() != model.config().mel_bands) {
    throw DataError("ns_forward: expected " + std::to_string(model.config().mel_bands) +
                    " mel bands, got " + std::to_string(noisy_mel.bands()));
  }
  if (noisy_mel.frames() < 1) throw DataError("ns_forward: need at least one frame");
  MelSpectrogram out = noisy_mel;
  out.values = noisy_mel.values + model.residual(noisy_mel.values);
  if (!out.values.allFinite()) throw ModelError("ns_forward: non-finite output");
  return out;
}

NsTrainState make_ns_train_state(const NsConfig& config) {
  NsTrainState state;
  state.model = NsModel::create(config);
  state.opt = nn::Adam(config.lr);
  state.rng_seed = config.seed;
  return state;
}

double ns_train_step(NsTrainState& state,
                     const std::vector<std::pair<const MelSpectrogram*, const MelSpectrogram*>>& batch) {
  if (batch.empty()) throw DataError("ns_train_step: empty batch");
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const auto& [noisy, clean] : batch) {
    if (noisy->values.rows() != clean->values.rows() ||
        noisy->values.cols() != clean->values.cols()) {
      throw DataError("ns_train_step: noisy/clean pair shapes differ");
    }
    nn::Graph g;
    nn::Tensor in = g.constant(noisy->values);
    nn::Tensor pred = g.add(in, state.model.residual(g, in));
    nn::Tensor loss = g.mean_abs(g.sub(pred, g.constant(clean->values)));
    total += loss.value()(0, 0) * inv_batch;
    g.backward(loss, inv_batch);
  }
  if (!std::isfinite(total)) {
    throw ModelError("ns_train_step: non-finite loss at step " + std::to_string(state.step));
  }
  state.opt.step(state.model.params().trainable());
  ++state.step;
  return total;
}

std::pair<Waveform, MelSpectrogram> ns_enhance(NsModel& model, const Waveform& noisy,
                                               int griffin_lim_iterations) {
  if (noisy.sample_rate != kPipelineRate) {
    throw DataError("ns_enhance: expected " + std::to_string(kPipelineRate) + " Hz input");
  }
  MelSpectrogram enhanced = ns_forward(model, mel_analyze(noisy));
  Waveform wav = mel_invert(enhanced, griffin_lim_iterations);
  return {std::move(wav), std::move(enhanced)};
}

void save_ns_checkpoint(const std::string& path, const NsTrainState& state) {
  json meta;
  meta["kind"] = "ns";
  meta["config"] = {{"channels", state.model.config().channels},
                    {"depth", state.model.config().depth},
                    {"mel_bands", state.model.config().mel_bands},
                    {"lr", state.model.config().lr},
                    {"seed", state.model.config().seed}};
  meta["step"] = state.step;
  meta["opt_steps"] = state.opt.steps_taken();
  meta["rng_seed"] = state.rng_seed;
  nn::save_checkpoint(path, meta.dump(), state.model.params());
}

NsTrainState load_ns_checkpoint(const std::string& path) {
  NsTrainState state;
  nn::ParamStore loaded;
  const std::string meta_str = nn::load_checkpoint(path, loaded);
  json meta = json::parse(meta_str);
  if (meta.value("kind", "") != "ns") {
    throw ModelError("not an ns checkpoint: " + path);
  }
  NsConfig config;
  config.channels = meta["config"].value("channels", 32);
  config.depth = meta["config"].value("depth", 4);
  config.mel_bands = meta["config"].value("mel_bands", 64);
  config.lr = meta["config"].value("lr", 2e-4);
  config.seed = meta["config"].value("seed", uint64_t{1});

  state.model = NsModel::create(config);
  for (nn::Param* p : state.model.params().all()) {
    const nn::Param& src = loaded.get(p->name);
    if (src.value.rows() != p->value.rows() || src.value.cols() != p->value.cols()) {
      throw ModelError("ns checkpoint shape mismatch for " + p->name + ": " + path);
    }
    p->value = src.value;
    p->m = src.m;
    p->v = src.v;
  }
  state.step = meta.value("step", int64_t{0});
  state.opt = nn::Adam(config.lr);
  state.opt.set_steps_taken(meta.value("opt_steps", int64_t{0}));
  state.rng_seed = meta.value("rng_seed", uint64_t{1});
  return state;
}

}  // namespace revoice::ns
