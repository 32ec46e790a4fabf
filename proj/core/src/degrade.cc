// core/src/degrade.cc
#include "revoice/degrade.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "revoice/base/error.h"
#include "revoice/base/rng.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace revoice {

void DegradationSpec::check() const {
  if (noise_id.has_value() != snr_db.has_value()) {
    throw DataError("degradation spec '" + utt_id +
                    "': snr_db must be present iff noise_id is present");
  }
  if (clip_threshold && (*clip_threshold <= 0.0 || *clip_threshold > 1.0)) {
    throw DataError("degradation spec '" + utt_id + "': clip_threshold must be in (0, 1]");
  }
  for (const auto& [start, dur] : drops) {
    if (dur <= 0.0) {
      throw DataError("degradation spec '" + utt_id + "': drop durations must be > 0");
    }
    if (start < 0.0) {
      throw DataError("degradation spec '" + utt_id + "': drop start must be >= 0");
    }
  }
}

std::string degradation_spec_to_json(const DegradationSpec& spec) {
  json j;
  j["utt_id"] = spec.utt_id;
  j["clean_path"] = spec.clean_path;
  if (spec.noise_id) j["noise_id"] = *spec.noise_id;
  if (spec.snr_db) j["snr_db"] = *spec.snr_db;
  if (spec.lowpass_hz) j["lowpass_hz"] = *spec.lowpass_hz;
  if (spec.highpass_hz) j["highpass_hz"] = *spec.highpass_hz;
  if (spec.clip_threshold) j["clip_threshold"] = *spec.clip_threshold;
  if (!spec.drops.empty()) {
    json d = json::array();
    for (const auto& [s, dur] : spec.drops) d.push_back({s, dur});
    j["drops"] = d;
  }
  j["seed"] = spec.seed;
  return j.dump();
}

DegradationSpec degradation_spec_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(std::string("bad degradation manifest line: ") + e.what());
  }
  DegradationSpec spec;
  spec.utt_id = j.value("utt_id", "");
  spec.clean_path = j.value("clean_path", "");
  if (j.contains("noise_id") && !j["noise_id"].is_null()) spec.noise_id = j["noise_id"].get<std::string>();
  if (j.contains("snr_db") && !j["snr_db"].is_null()) spec.snr_db = j["snr_db"].get<double>();
  if (j.contains("lowpass_hz") && !j["lowpass_hz"].is_null()) spec.lowpass_hz = j["lowpass_hz"].get<double>();
  if (j.contains("highpass_hz") && !j["highpass_hz"].is_null()) spec.highpass_hz = j["highpass_hz"].get<double>();
  if (j.contains("clip_threshold") && !j["clip_threshold"].is_null()) {
    spec.clip_threshold = j["clip_threshold"].get<double>();
  }
  if (j.contains("drops") && !j["drops"].is_null()) {
    for (const auto& d : j["drops"]) {
      spec.drops.emplace_back(d.at(0).get<double>(), d.at(1).get<double>());
    }
  }
  spec.seed = j.value("seed", uint64_t{0});
  spec.check();
  return spec;
}

std::vector<DegradationSpec> read_degradation_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open degradation manifest: " + path);
  std::vector<DegradationSpec> specs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    specs.push_back(degradation_spec_from_json(line));
  }
  return specs;
}

void write_degradation_manifest(const std::string& path,
                                const std::vector<DegradationSpec>& specs) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write degradation manifest: " + path);
  for (const auto& s : specs) out << degradation_spec_to_json(s) << "\n";
}

NoiseBank::NoiseBank(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("noise directory not found: " + dir);
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".wav") {
      paths_[entry.path().stem().string()] = entry.path().string();
    }
  }
}

bool NoiseBank::has(const std::string& noise_id) const {
  return paths_.count(noise_id) > 0 || cache_.count(noise_id) > 0;
}

std::vector<std::string> NoiseBank::ids() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : paths_) out.push_back(k);
  for (const auto& [k, v] : cache_) {
    if (!paths_.count(k)) out.push_back(k);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void NoiseBank::add(const std::string& noise_id, Waveform w) {
  cache_[noise_id] = std::move(w);
}

const Waveform& NoiseBank::get(const std::string& noise_id) const {
  auto it = cache_.find(noise_id);
  if (it != cache_.end()) return it->second;
  auto pit = paths_.find(noise_id);
  if (pit == paths_.end()) throw DataError("unknown noise_id: " + noise_id);
  cache_[noise_id] = read_wav(pit->second);
  return cache_.at(noise_id);
}

double snr_gain(const Waveform& clean, const Waveform& noise, double snr_db) {
  const double p_clean = mean_power(clean.samples);
  std::vector<double> n(noise.samples.begin(),
                        noise.samples.begin() +
                            std::min<size_t>(noise.samples.size(), clean.samples.size()));
  const double p_noise = mean_power(n);
  if (p_clean <= 1e-20 || p_noise <= 1e-20) {
    throw DataError("mix_at_snr: degenerate power (silent clean or silent noise)");
  }
  return std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));
}

Waveform mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db) {
  if (clean.sample_rate != noise.sample_rate) {
    throw DataError("mix_at_snr: sample rate mismatch");
  }
  if (clean.samples.empty()) throw DataError("mix_at_snr: empty clean input");
  if (noise.samples.empty()) throw DataError("mix_at_snr: degenerate power (silent clean or silent noise)");

  // Tile noise cyclically if shorter than clean, trim if longer.
  Waveform n = noise;
  if (n.samples.size() < clean.samples.size()) {
    std::vector<double> tiled(clean.samples.size());
    for (size_t i = 0; i < tiled.size(); ++i) tiled[i] = noise.samples[i % noise.samples.size()];
    n.samples = std::move(tiled);
  } else {
    n.samples.resize(clean.samples.size());
  }

  const double g = snr_gain(clean, n, snr_db);
  Waveform out = clean;
  for (size_t i = 0; i < out.samples.size(); ++i) out.samples[i] += g * n.samples[i];
  return out;
}

namespace {

// Symmetric windowed-sinc lowpass kernel (Blackman), odd length.
std::vector<double> lowpass_kernel(double cutoff_hz, int sample_rate, int taps) {
  std::vector<double> h(static_cast<size_t>(taps));
  const int mid = taps / 2;
  const double fc = cutoff_hz / sample_rate;  // normalized (cycles/sample)
  double sum = 0.0;
  for (int i = 0; i < taps; ++i) {
    const int k = i - mid;
    double v = (k == 0) ? 2.0 * fc : std::sin(2.0 * M_PI * fc * k) / (M_PI * k);
    const double u = static_cast<double>(i) / (taps - 1);
    const double win = 0.42 - 0.5 * std::cos(2.0 * M_PI * u) + 0.08 * std::cos(4.0 * M_PI * u);
    h[static_cast<size_t>(i)] = v * win;
    sum += h[static_cast<size_t>(i)];
  }
  for (auto& v : h) v /= sum;  // unity DC gain
  return h;
}

// Zero-phase FIR: reflect-pad, convolve with the symmetric kernel centered.
std::vector<double> filter_zero_phase(const std::vector<double>& x, const std::vector<double>& h) {
  const int64_t n = static_cast<int64_t>(x.size());
  const int64_t mid = static_cast<int64_t>(h.size()) / 2;
  std::vector<double> padded(static_cast<size_t>(n + 2 * mid));
  auto reflect = [&](int64_t i) {
    while (i < 0 || i >= n) {
      if (i < 0) i = -i;
      if (i >= n) i = 2 * (n - 1) - i;
      if (n == 1) return static_cast<int64_t>(0);
    }
    return i;
  };
  for (int64_t i = 0; i < n + 2 * mid; ++i) {
    padded[static_cast<size_t>(i)] = x[static_cast<size_t>(reflect(i - mid))];
  }
  std::vector<double> y(static_cast<size_t>(n), 0.0);
  for (int64_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (size_t k = 0; k < h.size(); ++k) {
      acc += h[k] * padded[static_cast<size_t>(i) + k];
    }
    y[static_cast<size_t>(i)] = acc;
  }
  return y;
}

}  // namespace

Waveform bandlimit(const Waveform& w, std::optional<double> lowpass_hz,
                   std::optional<double> highpass_hz) {
  if (!lowpass_hz && !highpass_hz) return w;
  const double nyquist = w.sample_rate / 2.0;
  for (const auto& c : {lowpass_hz, highpass_hz}) {
    if (c && (*c <= 0.0 || *c >= nyquist)) {
      throw DataError("bandlimit: cutoff must be in (0, Nyquist)");
    }
  }
  if (w.samples.empty()) return w;

  const int taps = std::min(4097, static_cast<int>(w.sample_rate * 0.064) | 1);
  Waveform out = w;
  if (lowpass_hz) {
    out.samples = filter_zero_phase(out.samples, lowpass_kernel(*lowpass_hz, w.sample_rate, taps));
  }
  if (highpass_hz) {
    // spectral inversion of the complementary lowpass
    std::vector<double> h = lowpass_kernel(*highpass_hz, w.sample_rate, taps);
    for (auto& v : h) v = -v;
    h[static_cast<size_t>(taps / 2)] += 1.0;
    out.samples = filter_zero_phase(out.samples, h);
  }
  return out;
}

Waveform clip(const Waveform& w, double threshold) {
  if (threshold <= 0.0 || threshold > 1.0) {
    throw DataError("clip: threshold must be in (0, 1]");
  }
  Waveform out = w;
  for (auto& s : out.samples) s = std::clamp(s, -threshold, threshold);
  return out;
}

Waveform packet_drop(const Waveform& w,
                     const std::vector<std::pair<double, double>>& drops) {
  Waveform out = w;
  const int64_t n = out.size();
  for (const auto& [start, dur] : drops) {
    if (dur <= 0.0) throw DataError("packet_drop: drop duration must be > 0");
    int64_t lo = std::llround(start * w.sample_rate);
    int64_t hi = lo + std::llround(dur * w.sample_rate);
    lo = std::clamp<int64_t>(lo, 0, n);
    hi = std::clamp<int64_t>(hi, 0, n);
    for (int64_t i = lo; i < hi; ++i) out.samples[static_cast<size_t>(i)] = 0.0;
  }
  return out;
}

Waveform prepare_noise(const Waveform& noise, int64_t target_len, uint64_t seed) {
  if (noise.samples.empty()) throw DataError("prepare_noise: empty noise");
  Rng rng(seed);
  const size_t offset = static_cast<size_t>(rng.uniform_int(noise.samples.size()));
  Waveform out;
  out.sample_rate = noise.sample_rate;
  out.samples.resize(static_cast<size_t>(target_len));
  for (int64_t i = 0; i < target_len; ++i) {
    out.samples[static_cast<size_t>(i)] =
        noise.samples[(offset + static_cast<size_t>(i)) % noise.samples.size()];
  }
  return out;
}

Waveform apply_spec(const Waveform& clean, const DegradationSpec& spec,
                    const NoiseBank& bank) {
  spec.check();
  Waveform out = bandlimit(clean, spec.lowpass_hz, spec.highpass_hz);
  if (spec.clip_threshold) out = clip(out, *spec.clip_threshold);
  if (spec.noise_id) {
    const Waveform& noise = bank.get(*spec.noise_id);
    if (noise.sample_rate != clean.sample_rate) {
      throw DataError("apply_spec: noise '" + *spec.noise_id + "' sample rate mismatch");
    }
    out = mix_at_snr(out, prepare_noise(noise, out.size(), spec.seed), *spec.snr_db);
  }
  if (!spec.drops.empty()) out = packet_drop(out, spec.drops);
  return out;
}

}  // namespace revoice
