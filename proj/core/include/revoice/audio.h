// core/include/revoice/audio.h
#ifndef REVOICE_AUDIO_H_
#define REVOICE_AUDIO_H_

#include <string>
#include <vector>

namespace revoice {

// Mono audio, floating point samples nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  int64_t size() const { return static_cast<int64_t>(samples.size()); }
  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Throws DataError if sample_rate <= 0 or any sample is NaN/Inf.
void validate(const Waveform& w, const std::string& context);

// 16-bit PCM mono WAV. Multichannel input is rejected with an explicit error.
Waveform read_wav(const std::string& path);
void write_wav(const std::string& path, const Waveform& w);

// Band-limited resampling (windowed-sinc interpolation). Output length is
// round(len * target_rate / source_rate). Same-rate input is returned as-is.
Waveform resample(const Waveform& w, int target_rate);

double rms(const std::vector<double>& x);
double mean_power(const std::vector<double>& x);

}  // namespace revoice

#endif  // REVOICE_AUDIO_H_
