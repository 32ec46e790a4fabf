// core/include/revoice/metrics/common.h
#ifndef REVOICE_METRICS_COMMON_H_
#define REVOICE_METRICS_COMMON_H_

#include <Eigen/Core>
#include <optional>
#include <string>

#include "revoice/audio.h"
#include "revoice/mel.h"

namespace revoice::metrics {

// Cosine similarity of two unit-norm speaker embeddings.
double secs(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// 10*log10(P_clean / P_(mixture - clean)); +Inf means "no noise".
double measured_snr(const Waveform& clean, const Waveform& mixture);

// Root-mean-square frame-wise log-spectral distance in dB.
double lsd(const MelSpectrogram& a, const MelSpectrogram& b);

// One report line per evaluated utterance.
struct MetricReport {
  std::string utt_id;
  std::string mode;
  double snr_condition_db = 0.0;
  std::optional<double> stoi;
  std::optional<double> secs;
  std::optional<double> cer;
  std::optional<double> lsd;
  int64_t alignment_lag = 0;
  std::string ref_utt_id;       // clean reference clip used for SECS
  std::optional<double> mos;    // external scorer, if configured
  std::optional<std::string> transcript;  // external ASR, if configured
};

std::string metric_report_to_json(const MetricReport& r);
MetricReport metric_report_from_json(const std::string& line);

}  // namespace revoice::metrics

#endif  // REVOICE_METRICS_COMMON_H_
