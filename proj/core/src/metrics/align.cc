// core/src/metrics/align.cc
#include "revoice/metrics/align.h"

#include <algorithm>
#include <cmath>
#include <complex>

#include "revoice/base/error.h"
#include "revoice/fft.h"

namespace revoice::metrics {

int64_t gcc_phat_lag(const Waveform& ref, const Waveform& est, int64_t max_lag) {
  if (ref.samples.empty() || est.samples.empty()) {
    throw DataError("gcc_phat: empty input");
  }
  const int64_t min_len = std::min(ref.size(), est.size());
  if (max_lag <= 0 || max_lag >= min_len) {
    throw DataError("gcc_phat: max_lag must be in (0, min signal length)");
  }
  const bool ref_silent = std::all_of(ref.samples.begin(), ref.samples.end(),
                                      [](double v) { return v == 0.0; });
  const bool est_silent = std::all_of(est.samples.begin(), est.samples.end(),
                                      [](double v) { return v == 0.0; });
  if (ref_silent || est_silent) throw DataError("gcc_phat: all-zero input");

  const size_t n = next_pow2(static_cast<size_t>(ref.size() + est.size()));
  auto R = fft_real(ref.samples, n);
  const auto E = fft_real(est.samples, n);

  // PHAT weighting: keep phase only
  for (size_t k = 0; k < n; ++k) {
    const std::complex<double> c = R[k] * std::conj(E[k]);
    const double mag = std::abs(c);
    R[k] = mag > 1e-300 ? c / mag : std::complex<double>(0.0, 0.0);
  }
  fft(R, true);

  // ifft index m holds sum_n ref[n+m] * est[n]; negative lags wrap around.
  int64_t best_lag = 0;
  double best_val = -1e30;
  for (int64_t lag = -max_lag; lag <= max_lag; ++lag) {
    const size_t idx = static_cast<size_t>((lag + static_cast<int64_t>(n)) % static_cast<int64_t>(n));
    const double v = R[idx].real();
    if (v > best_val) {
      best_val = v;
      best_lag = lag;
    }
  }
  return best_lag;
}

AlignResult gcc_phat_align(const Waveform& ref, const Waveform& est, int64_t max_lag) {
  AlignResult result;
  result.lag = gcc_phat_lag(ref, est, max_lag);
  result.aligned_est.sample_rate = est.sample_rate;
  result.aligned_est.samples.assign(ref.samples.size(), 0.0);
  const int64_t est_len = est.size();
  for (int64_t i = 0; i < ref.size(); ++i) {
    const int64_t j = i - result.lag;
    if (j >= 0 && j < est_len) {
      result.aligned_est.samples[static_cast<size_t>(i)] = est.samples[static_cast<size_t>(j)];
    }
  }
  return result;
}

}  // namespace revoice::metrics
