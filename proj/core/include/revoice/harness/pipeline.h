// core/include/revoice/harness/pipeline.h
#ifndef REVOICE_HARNESS_PIPELINE_H_
#define REVOICE_HARNESS_PIPELINE_H_

#include <map>
#include <string>
#include <vector>

#include "revoice/degrade.h"
#include "revoice/harness/config.h"
#include "revoice/harness/corpus.h"
#include "revoice/metrics/common.h"

namespace revoice::harness {

enum class PipelineMode { kNoisy, kNsOnly, kVcE, kVcAe };

std::string to_string(PipelineMode mode);
PipelineMode pipeline_mode_from_string(const std::string& s);

// One degraded eval file (utterance x SNR).
struct EvalEntry {
  std::string degraded_id;
  std::string base_utt;
  std::string speaker_id;
  std::string transcript;
  double snr_db = 0.0;
  std::string wav_path;      // degraded
  std::string clean_path;
  std::string ref_utt_id;    // clean same-speaker reference clip
  std::string ref_wav_path;
};

struct EvalSet {
  std::vector<EvalEntry> entries;
  std::string degradation_manifest_path;
  std::string index_path;
};

// eval split x snr_grid -> degraded WAVs under <work_dir>/eval plus a
// DegradationSpec manifest and a harness index. Deterministic under the seed.
EvalSet build_eval_set(const CorpusManifest& manifest, const ExperimentConfig& config,
                       const NoiseBank& bank);
EvalSet load_eval_set(const std::string& index_path);

struct PipelineResult {
  std::vector<metrics::MetricReport> reports;
  int warning_count = 0;
};

// Runs one system over the eval set: degraded input -> mode output ->
// GCC-PHAT alignment -> STOI/LSD/SECS (+ optional external CER/MOS).
PipelineResult run_pipeline(const ExperimentConfig& config, PipelineMode mode,
                            const EvalSet& eval_set);

void write_report_jsonl(const std::string& path,
                        const std::vector<metrics::MetricReport>& reports);
std::vector<metrics::MetricReport> read_report_jsonl(const std::string& path);

// Per-(mode, SNR) unweighted means plus an "Avg." row per mode.
struct SnrRow {
  std::string mode;
  double snr_db = 0.0;  // NaN encodes the average row
  bool is_average = false;
  int count = 0;
  std::map<std::string, double> means;  // metric name -> mean (set iff present)
};
std::vector<SnrRow> aggregate_reports(const std::vector<metrics::MetricReport>& reports);
std::string render_summary_table(const std::vector<SnrRow>& rows);
void write_summary_csv(const std::string& path, const std::vector<SnrRow>& rows);

// ---- training drivers (used by the CLI verbs) ----

// Trains the NS stage on seeded mixtures of the train split at the adaptation
// SNR grid; writes the checkpoint and returns its path.
std::string train_ns_driver(const ExperimentConfig& config, const CorpusManifest& manifest,
                            const NoiseBank& bank, const std::string& out_path);

// Stage-1 VC training on clean mels (speaker pretraining first).
std::string train_vc_driver(const ExperimentConfig& config, const CorpusManifest& manifest,
                            const std::string& out_path);

// Stage-2 content-encoder adaptation on noisy/NS-enhanced mels.
std::string adapt_vc_driver(const ExperimentConfig& config, const CorpusManifest& manifest,
                            const NoiseBank& bank, const std::string& vc_ckpt,
                            const std::string& ns_ckpt, const std::string& out_path);

}  // namespace revoice::harness

#endif  // REVOICE_HARNESS_PIPELINE_H_
