// core/include/revoice/harness/external.h
#ifndef REVOICE_HARNESS_EXTERNAL_H_
#define REVOICE_HARNESS_EXTERNAL_H_

#include <optional>
#include <string>

namespace revoice::harness {

// Optional HTTP scorers. Unset URLs mean the corresponding fields stay null;
// endpoint failures log a warning and never stop the pipeline.
struct ExternalClientConfig {
  std::string asr_url;  // POST wav -> {"text": "..."}
  std::string mos_url;  // POST wav -> {"mos": 3.2}
  int timeout_ms = 3000;

  bool configured() const { return !asr_url.empty() || !mos_url.empty(); }
};

struct ExternalScore {
  std::optional<std::string> transcript;
  std::optional<double> mos;
  int warnings = 0;
};

ExternalScore external_score(const ExternalClientConfig& config, const std::string& wav_path);

}  // namespace revoice::harness

#endif  // REVOICE_HARNESS_EXTERNAL_H_
