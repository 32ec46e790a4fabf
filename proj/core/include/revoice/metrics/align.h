// core/include/revoice/metrics/align.h
#ifndef REVOICE_METRICS_ALIGN_H_
#define REVOICE_METRICS_ALIGN_H_

#include <cstdint>

#include "revoice/audio.h"

namespace revoice::metrics {

struct AlignResult {
  int64_t lag = 0;        // shift applied to est: aligned[n] = est[n - lag]
  Waveform aligned_est;   // trimmed/padded to ref length
};

// Generalized cross-correlation with phase transform. Finds the lag in
// [-max_lag, max_lag] maximizing the PHAT-weighted correlation and returns
// est shifted by that lag. If est lags ref by d samples the result is -d.
AlignResult gcc_phat_align(const Waveform& ref, const Waveform& est, int64_t max_lag);

// Lag only.
int64_t gcc_phat_lag(const Waveform& ref, const Waveform& est, int64_t max_lag);

}  // namespace revoice::metrics

#endif  // REVOICE_METRICS_ALIGN_H_
