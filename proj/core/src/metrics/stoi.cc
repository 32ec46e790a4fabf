// core/src/metrics/stoi.cc
#include "revoice/metrics/stoi.h"

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <vector>

#include "revoice/base/error.h"
#include "revoice/fft.h"

namespace revoice::metrics {

namespace {

constexpr int kStoiRate = 10000;
constexpr int kFrameLen = 256;   // 25.6 ms at 10 kHz
constexpr int kFrameHop = 128;   // 50% overlap
constexpr int kNfft = 512;
constexpr int kNumBands = 15;
constexpr double kFirstCenterHz = 150.0;
constexpr int kSegLen = 30;      // 384 ms
constexpr double kDynRangeDb = 40.0;
constexpr double kBetaDb = -15.0;

std::vector<double> stoi_hann(int n) {
  // symmetric Hann with zero endpoints, as used by the metric definition
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    w[static_cast<size_t>(i)] = 0.5 * (1.0 - std::cos(2.0 * M_PI * (i + 1) / (n + 1)));
  }
  return w;
}

// Frames above (max energy - 40 dB) in the clean signal are kept in BOTH
// signals; the survivors are re-assembled by overlap-add.
void remove_silent_frames(std::vector<double>& x, std::vector<double>& y) {
  const std::vector<double> w = stoi_hann(kFrameLen);
  const int64_t n = static_cast<int64_t>(x.size());
  const int64_t num_frames = n < kFrameLen ? 0 : (n - kFrameLen) / kFrameHop + 1;
  if (num_frames <= 0) return;

  std::vector<double> energy_db(static_cast<size_t>(num_frames));
  double max_db = -1e30;
  for (int64_t f = 0; f < num_frames; ++f) {
    double e = 0.0;
    for (int i = 0; i < kFrameLen; ++i) {
      const double v = x[static_cast<size_t>(f * kFrameHop + i)] * w[static_cast<size_t>(i)];
      e += v * v;
    }
    energy_db[static_cast<size_t>(f)] = 10.0 * std::log10(e + 1e-300);
    max_db = std::max(max_db, energy_db[static_cast<size_t>(f)]);
  }

  std::vector<int64_t> keep;
  for (int64_t f = 0; f < num_frames; ++f) {
    if (energy_db[static_cast<size_t>(f)] > max_db - kDynRangeDb) keep.push_back(f);
  }

  const int64_t out_len = keep.empty() ? 0 : (static_cast<int64_t>(keep.size()) - 1) * kFrameHop + kFrameLen;
  std::vector<double> xs(static_cast<size_t>(out_len), 0.0), ys(static_cast<size_t>(out_len), 0.0);
  for (size_t j = 0; j < keep.size(); ++j) {
    const int64_t src = keep[j] * kFrameHop;
    const int64_t dst = static_cast<int64_t>(j) * kFrameHop;
    for (int i = 0; i < kFrameLen; ++i) {
      xs[static_cast<size_t>(dst + i)] += x[static_cast<size_t>(src + i)] * w[static_cast<size_t>(i)];
      ys[static_cast<size_t>(dst + i)] += y[static_cast<size_t>(src + i)] * w[static_cast<size_t>(i)];
    }
  }
  x = std::move(xs);
  y = std::move(ys);
}

// One-third-octave band energies: [frames x 15].
Eigen::MatrixXd band_energies(const std::vector<double>& sig,
                              const std::vector<std::pair<int, int>>& bands) {
  const std::vector<double> w = stoi_hann(kFrameLen);
  const int64_t n = static_cast<int64_t>(sig.size());
  const int64_t num_frames = n < kFrameLen ? 0 : (n - kFrameLen) / kFrameHop + 1;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(num_frames, kNumBands);

  std::vector<double> frame(static_cast<size_t>(kFrameLen));
  for (int64_t f = 0; f < num_frames; ++f) {
    for (int i = 0; i < kFrameLen; ++i) {
      frame[static_cast<size_t>(i)] = sig[static_cast<size_t>(f * kFrameHop + i)] * w[static_cast<size_t>(i)];
    }
    const auto spec = fft_real(frame, kNfft);
    for (int b = 0; b < kNumBands; ++b) {
      double e = 0.0;
      for (int k = bands[static_cast<size_t>(b)].first; k < bands[static_cast<size_t>(b)].second; ++k) {
        e += std::norm(spec[static_cast<size_t>(k)]);
      }
      out(f, b) = std::sqrt(e);
    }
  }
  return out;
}

// Bin ranges [lo, hi) of the 15 one-third-octave bands on the 512-point grid.
std::vector<std::pair<int, int>> third_octave_bands() {
  std::vector<std::pair<int, int>> bands;
  const int num_bins = kNfft / 2 + 1;
  for (int b = 0; b < kNumBands; ++b) {
    const double cf = kFirstCenterHz * std::pow(2.0, b / 3.0);
    const double f_lo = cf * std::pow(2.0, -1.0 / 6.0);
    const double f_hi = cf * std::pow(2.0, 1.0 / 6.0);
    int lo = 0, hi = 0;
    double best_lo = 1e30, best_hi = 1e30;
    for (int k = 0; k < num_bins; ++k) {
      const double f = static_cast<double>(k) * kStoiRate / kNfft;
      if (std::abs(f - f_lo) < best_lo) { best_lo = std::abs(f - f_lo); lo = k; }
      if (std::abs(f - f_hi) < best_hi) { best_hi = std::abs(f - f_hi); hi = k; }
    }
    bands.emplace_back(lo, hi);
  }
  return bands;
}

}  // namespace

double stoi(const Waveform& clean, const Waveform& degraded) {
  if (clean.sample_rate != degraded.sample_rate) {
    throw DataError("stoi: sample rate mismatch; align first (use gcc_phat_align)");
  }
  if (clean.samples.size() != degraded.samples.size()) {
    throw DataError("stoi: length mismatch; align first (use gcc_phat_align)");
  }
  if (clean.samples.empty()) throw DataError("stoi: empty input");

  Waveform c = clean.sample_rate == kStoiRate ? clean : resample(clean, kStoiRate);
  Waveform d = degraded.sample_rate == kStoiRate ? degraded : resample(degraded, kStoiRate);

  std::vector<double> x = std::move(c.samples);
  std::vector<double> y = std::move(d.samples);
  remove_silent_frames(x, y);

  const auto bands = third_octave_bands();
  const Eigen::MatrixXd X = band_energies(x, bands);
  const Eigen::MatrixXd Y = band_energies(y, bands);
  const int64_t frames = X.rows();
  if (frames < kSegLen) {
    throw DataError("stoi: signal too short after silent-frame removal (need >= " +
                    std::to_string(kSegLen) + " frames)");
  }

  const double clip_factor = std::pow(10.0, -kBetaDb / 20.0);  // 10^(15/20)
  double acc = 0.0;
  int64_t count = 0;
  for (int64_t m = kSegLen; m <= frames; ++m) {
    for (int b = 0; b < kNumBands; ++b) {
      Eigen::VectorXd xs = X.col(b).segment(m - kSegLen, kSegLen);
      Eigen::VectorXd ys = Y.col(b).segment(m - kSegLen, kSegLen);

      // scale, then clip against the SDR bound
      const double alpha = xs.norm() / (ys.norm() + 1e-300);
      for (int i = 0; i < kSegLen; ++i) {
        ys(i) = std::min(alpha * ys(i), xs(i) * (1.0 + clip_factor));
      }

      xs.array() -= xs.mean();
      ys.array() -= ys.mean();
      const double denom = xs.norm() * ys.norm();
      acc += denom > 1e-300 ? xs.dot(ys) / denom : 0.0;
      ++count;
    }
  }
  return acc / static_cast<double>(count);
}

}  // namespace revoice::metrics
