// core/src/stft.cc
#include "revoice/stft.h"

#include <cmath>
#include <complex>

#include "revoice/base/error.h"
#include "revoice/fft.h"

namespace revoice {

std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    w[static_cast<size_t>(i)] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / n));
  }
  return w;
}

namespace {

// Reflect-pad by fft_size/2 on both sides (librosa-style centering).
std::vector<double> center_pad(const std::vector<double>& x, int pad) {
  const int64_t n = static_cast<int64_t>(x.size());
  std::vector<double> y(static_cast<size_t>(n + 2 * pad));
  auto reflect = [&](int64_t i) {
    // reflect without repeating the edge sample
    while (i < 0 || i >= n) {
      if (i < 0) i = -i;
      if (i >= n) i = 2 * (n - 1) - i;
      if (n == 1) return static_cast<int64_t>(0);
    }
    return i;
  };
  for (int64_t i = 0; i < n + 2 * pad; ++i) {
    y[static_cast<size_t>(i)] = x[static_cast<size_t>(reflect(i - pad))];
  }
  return y;
}

}  // namespace

Spectrogram stft(const Waveform& w, int fft_size, int hop) {
  if (w.samples.empty()) throw DataError("stft: empty input");
  if (hop <= 0 || fft_size <= 0 || hop > fft_size) {
    throw DataError("stft: invalid framing (hop must be in (0, fft_size])");
  }
  if ((static_cast<size_t>(fft_size) & (static_cast<size_t>(fft_size) - 1)) != 0) {
    throw DataError("stft: fft_size must be a power of two");
  }
  validate(w, "stft");

  const int pad = fft_size / 2;
  const std::vector<double> x = center_pad(w.samples, pad);
  const int64_t padded = static_cast<int64_t>(x.size());
  const int64_t frames = (padded - fft_size) / hop + 1;
  const int bins = fft_size / 2 + 1;
  const std::vector<double> win = hann_window(fft_size);

  Spectrogram s;
  s.frame_hop = hop;
  s.fft_size = fft_size;
  s.sample_rate = w.sample_rate;
  s.num_samples = w.size();
  s.magnitudes.resize(frames, bins);
  s.phases.resize(frames, bins);

  std::vector<std::complex<double>> buf(static_cast<size_t>(fft_size));
  for (int64_t f = 0; f < frames; ++f) {
    const int64_t off = f * hop;
    for (int i = 0; i < fft_size; ++i) {
      buf[static_cast<size_t>(i)] = {x[static_cast<size_t>(off + i)] * win[static_cast<size_t>(i)], 0.0};
    }
    fft(buf, false);
    for (int k = 0; k < bins; ++k) {
      s.magnitudes(f, k) = std::abs(buf[static_cast<size_t>(k)]);
      s.phases(f, k) = std::arg(buf[static_cast<size_t>(k)]);
    }
  }
  return s;
}

Waveform istft(const Spectrogram& s) {
  const int fft_size = s.fft_size;
  const int hop = s.frame_hop;
  const int bins = fft_size / 2 + 1;
  if (hop <= 0 || fft_size <= 0 || hop > fft_size) {
    throw DataError("istft: invalid framing metadata");
  }
  if (s.magnitudes.cols() != bins || s.phases.cols() != bins ||
      s.magnitudes.rows() != s.phases.rows()) {
    throw DataError("istft: inconsistent dimensions (bins must equal fft_size/2 + 1)");
  }
  if ((s.magnitudes.array() < 0.0).any()) {
    throw DataError("istft: magnitudes must be non-negative");
  }

  const int64_t frames = s.frames();
  const int pad = fft_size / 2;
  const int64_t padded = (frames - 1) * hop + fft_size;
  std::vector<double> acc(static_cast<size_t>(padded), 0.0);
  std::vector<double> norm(static_cast<size_t>(padded), 0.0);
  const std::vector<double> win = hann_window(fft_size);

  std::vector<std::complex<double>> buf(static_cast<size_t>(fft_size));
  for (int64_t f = 0; f < frames; ++f) {
    for (int k = 0; k < bins; ++k) {
      const std::complex<double> v = std::polar(s.magnitudes(f, k), s.phases(f, k));
      buf[static_cast<size_t>(k)] = v;
      if (k > 0 && k < fft_size - k) buf[static_cast<size_t>(fft_size - k)] = std::conj(v);
    }
    fft(buf, true);
    const int64_t off = f * hop;
    for (int i = 0; i < fft_size; ++i) {
      acc[static_cast<size_t>(off + i)] += buf[static_cast<size_t>(i)].real() * win[static_cast<size_t>(i)];
      norm[static_cast<size_t>(off + i)] += win[static_cast<size_t>(i)] * win[static_cast<size_t>(i)];
    }
  }

  // Trim the centering pad. Target length: the analyzed sample count when
  // recorded, otherwise everything the frames cover.
  int64_t want = s.num_samples > 0 ? s.num_samples : std::max<int64_t>(padded - 2 * pad, 0);
  want = std::min<int64_t>(want, padded - pad);

  Waveform out;
  out.sample_rate = s.sample_rate;
  out.samples.resize(static_cast<size_t>(want));
  for (int64_t i = 0; i < want; ++i) {
    const size_t j = static_cast<size_t>(i + pad);
    out.samples[static_cast<size_t>(i)] = norm[j] > 1e-10 ? acc[j] / norm[j] : 0.0;
  }
  return out;
}

}  // namespace revoice
