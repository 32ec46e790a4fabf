// core/src/mel.cc
#include "revoice/mel.h"

#include <Eigen/Dense>
#include <cmath>

#include "revoice/base/error.h"

namespace revoice {

// Slaney scale: linear below 1 kHz, logarithmic above.
double hz_to_mel(double hz) {
  constexpr double kLin = 200.0 / 3.0;
  constexpr double kMinLogHz = 1000.0;
  constexpr double kMinLogMel = 15.0;
  const double kLogStep = std::log(6.4) / 27.0;
  if (hz < kMinLogHz) return hz / kLin;
  return kMinLogMel + std::log(hz / kMinLogHz) / kLogStep;
}

double mel_to_hz(double mel) {
  constexpr double kLin = 200.0 / 3.0;
  constexpr double kMinLogHz = 1000.0;
  constexpr double kMinLogMel = 15.0;
  const double kLogStep = std::log(6.4) / 27.0;
  if (mel < kMinLogMel) return mel * kLin;
  return kMinLogHz * std::exp((mel - kMinLogMel) * kLogStep);
}

Eigen::MatrixXd mel_filterbank(int num_bands, int fft_size, int sample_rate) {
  const int bins = fft_size / 2 + 1;
  const double mel_lo = hz_to_mel(0.0);
  const double mel_hi = hz_to_mel(sample_rate / 2.0);

  std::vector<double> edges(static_cast<size_t>(num_bands) + 2);
  for (int i = 0; i < num_bands + 2; ++i) {
    edges[static_cast<size_t>(i)] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (num_bands + 1));
  }

  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(num_bands, bins);
  for (int m = 0; m < num_bands; ++m) {
    const double f_lo = edges[static_cast<size_t>(m)];
    const double f_c = edges[static_cast<size_t>(m) + 1];
    const double f_hi = edges[static_cast<size_t>(m) + 2];
    const double enorm = 2.0 / (f_hi - f_lo);  // area normalization
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / fft_size;
      const double up = (f - f_lo) / std::max(f_c - f_lo, 1e-12);
      const double down = (f_hi - f) / std::max(f_hi - f_c, 1e-12);
      fb(m, k) = std::max(0.0, std::min(up, down)) * enorm;
    }
  }
  return fb;
}

MelSpectrogram mel_from_spectrogram(const Spectrogram& s, int num_bands) {
  static thread_local Eigen::MatrixXd cached_fb;
  static thread_local int cached_key = 0;
  const int key = num_bands * 1000003 + s.fft_size * 31 + s.sample_rate;
  if (cached_key != key) {
    cached_fb = mel_filterbank(num_bands, s.fft_size, s.sample_rate);
    cached_key = key;
  }

  const Eigen::MatrixXd power = s.magnitudes.array().square();
  MelSpectrogram m;
  m.frame_hop = s.frame_hop;
  m.sample_rate = s.sample_rate;
  m.values = (power * cached_fb.transpose()).array().max(kLogFloorPower).log();
  return m;
}

MelSpectrogram mel_analyze(const Waveform& w) {
  if (w.sample_rate != kPipelineRate) {
    throw DataError("mel_analyze: expected " + std::to_string(kPipelineRate) +
                    " Hz input, got " + std::to_string(w.sample_rate) +
                    " Hz; resample() first");
  }
  if (w.samples.empty()) throw DataError("mel_analyze: empty input");
  return mel_from_spectrogram(stft(w, kFftSize, kHop), kMelBands);
}

double spectral_convergence(const Waveform& x, const Eigen::MatrixXd& target_mag,
                            int fft_size, int hop) {
  Spectrogram s = stft(x, fft_size, hop);
  const int64_t rows = std::min(s.magnitudes.rows(), target_mag.rows());
  const double num = (s.magnitudes.topRows(rows) - target_mag.topRows(rows)).norm();
  const double den = target_mag.topRows(rows).norm();
  return den > 0.0 ? num / den : num;
}

Waveform mel_invert(const MelSpectrogram& m, int iterations) {
  if (iterations <= 0) throw DataError("mel_invert: iterations must be >= 1");
  if (m.frames() < 1) throw DataError("mel_invert: empty mel spectrogram");
  if (!m.values.allFinite()) throw DataError("mel_invert: non-finite mel values");

  const int fft_size = kFftSize;
  const int hop = m.frame_hop;
  const int bands = m.bands();

  // Pseudo-inverse of the filterbank, negative leakage clipped at zero.
  static thread_local Eigen::MatrixXd cached_pinv;
  static thread_local int cached_key = 0;
  const int key = bands * 1000003 + fft_size * 31 + m.sample_rate;
  if (cached_key != key) {
    const Eigen::MatrixXd fb = mel_filterbank(bands, fft_size, m.sample_rate);
    cached_pinv = fb.completeOrthogonalDecomposition().pseudoInverse();
    cached_key = key;
  }

  // Bands at the log floor are silence; subtract the floor so they invert to
  // exact zeros instead of a small broadband pedestal.
  const Eigen::MatrixXd mel_power =
      (m.values.array().exp() - kLogFloorPower).max(0.0);
  const Eigen::MatrixXd power = (mel_power * cached_pinv.transpose()).array().max(0.0);
  const Eigen::MatrixXd mag = power.array().sqrt();

  Spectrogram s;
  s.frame_hop = hop;
  s.fft_size = fft_size;
  s.sample_rate = m.sample_rate;
  s.num_samples = std::max<int64_t>((m.frames() - 1) * hop, hop);
  s.magnitudes = mag;
  s.phases = Eigen::MatrixXd::Zero(mag.rows(), mag.cols());

  // Plain Griffin-Lim: fixed magnitudes, iterate phase via analysis/synthesis.
  Waveform x = istft(s);
  for (int it = 1; it < iterations; ++it) {
    Spectrogram est = stft(x, fft_size, hop);
    s.phases = est.phases.topRows(s.magnitudes.rows());
    x = istft(s);
  }
  return x;
}

}  // namespace revoice
