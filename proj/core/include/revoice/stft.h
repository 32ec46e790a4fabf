// core/include/revoice/stft.h
#ifndef REVOICE_STFT_H_
#define REVOICE_STFT_H_

#include <Eigen/Core>
#include <vector>

#include "revoice/audio.h"

namespace revoice {

// Magnitude/phase short-time spectrum. bins == fft_size/2 + 1.
struct Spectrogram {
  Eigen::MatrixXd magnitudes;  // [frames x bins], >= 0
  Eigen::MatrixXd phases;      // [frames x bins], radians
  int frame_hop = 256;
  int fft_size = 1024;
  int sample_rate = 16000;
  int64_t num_samples = 0;  // length of the analyzed waveform

  int64_t frames() const { return magnitudes.rows(); }
  int bins() const { return static_cast<int>(magnitudes.cols()); }
};

// Periodic Hann window of length n.
std::vector<double> hann_window(int n);

// Center-padded (reflect) analysis. Frame count is
// floor((padded_len - fft_size)/hop) + 1 == floor(len/hop) + 1.
Spectrogram stft(const Waveform& w, int fft_size = 1024, int hop = 256);

// Weighted overlap-add synthesis with per-sample window normalization.
// Exact inverse of stft() for unmodified spectra.
Waveform istft(const Spectrogram& s);

}  // namespace revoice

#endif  // REVOICE_STFT_H_
