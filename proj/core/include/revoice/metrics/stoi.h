// core/include/revoice/metrics/stoi.h
#ifndef REVOICE_METRICS_STOI_H_
#define REVOICE_METRICS_STOI_H_

#include "revoice/audio.h"

namespace revoice::metrics {

// Short-time objective intelligibility of `degraded` against `clean`.
// Both signals must share a sample rate and length; callers align first
// (see gcc_phat_align). Internally: 10 kHz rate, 40 dB silent-frame removal,
// 15 one-third-octave bands from 150 Hz, 384 ms segments, -15 dB clipping.
double stoi(const Waveform& clean, const Waveform& degraded);

}  // namespace revoice::metrics

#endif  // REVOICE_METRICS_STOI_H_
