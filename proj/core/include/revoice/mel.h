// core/include/revoice/mel.h
#ifndef REVOICE_MEL_H_
#define REVOICE_MEL_H_

#include <Eigen/Core>

#include "revoice/audio.h"
#include "revoice/stft.h"

namespace revoice {

inline constexpr int kMelBands = 64;
inline constexpr int kPipelineRate = 16000;
inline constexpr int kFftSize = 1024;
inline constexpr int kHop = 256;
// Log floor keeps loss targets bounded: values are clamped at log(1e-5).
inline constexpr double kLogFloorPower = 1e-5;

// Log-Mel energies, natural log, [frames x 64].
struct MelSpectrogram {
  Eigen::MatrixXd values;
  int frame_hop = kHop;
  int sample_rate = kPipelineRate;

  int64_t frames() const { return values.rows(); }
  int bands() const { return static_cast<int>(values.cols()); }
};

// Slaney-style triangular filterbank, area-normalized, 0 Hz .. sample_rate/2.
// Rows are bands, columns are FFT bins (fft_size/2 + 1).
Eigen::MatrixXd mel_filterbank(int num_bands, int fft_size, int sample_rate);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// 64-band log-Mel analysis at the fixed 16 kHz pipeline rate.
MelSpectrogram mel_analyze(const Waveform& w);
MelSpectrogram mel_from_spectrogram(const Spectrogram& s, int num_bands = kMelBands);

// Griffin-Lim phase reconstruction on a pseudo-inverted Mel spectrum.
Waveform mel_invert(const MelSpectrogram& m, int iterations = 32);

// || |STFT(x)| - M ||_F / ||M||_F, the Griffin-Lim convergence measure.
double spectral_convergence(const Waveform& x, const Eigen::MatrixXd& target_mag,
                            int fft_size, int hop);

}  // namespace revoice

#endif  // REVOICE_MEL_H_
