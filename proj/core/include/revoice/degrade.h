// core/include/revoice/degrade.h
#ifndef REVOICE_DEGRADE_H_
#define REVOICE_DEGRADE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "revoice/audio.h"

namespace revoice {

// Declarative description of one corruption. Optional fields are skipped.
struct DegradationSpec {
  std::string utt_id;
  std::string clean_path;
  std::optional<std::string> noise_id;
  std::optional<double> snr_db;
  std::optional<double> lowpass_hz;
  std::optional<double> highpass_hz;
  std::optional<double> clip_threshold;                  // (0, 1]
  std::vector<std::pair<double, double>> drops;          // (start s, duration s)
  uint64_t seed = 0;

  // Throws DataError on violated invariants (snr <-> noise pairing, ranges).
  void check() const;
};

// JSON-lines manifest, one DegradationSpec per line.
std::vector<DegradationSpec> read_degradation_manifest(const std::string& path);
void write_degradation_manifest(const std::string& path,
                                const std::vector<DegradationSpec>& specs);
std::string degradation_spec_to_json(const DegradationSpec& spec);
DegradationSpec degradation_spec_from_json(const std::string& line);

// Directory of noise WAVs indexed by filename stem, loaded lazily.
class NoiseBank {
 public:
  NoiseBank() = default;
  explicit NoiseBank(const std::string& dir);

  // Throws DataError for unknown ids.
  const Waveform& get(const std::string& noise_id) const;
  bool has(const std::string& noise_id) const;
  std::vector<std::string> ids() const;
  void add(const std::string& noise_id, Waveform w);

 private:
  mutable std::map<std::string, Waveform> cache_;
  std::map<std::string, std::string> paths_;
};

// output = clean + g * noise with g chosen so the measured SNR over the whole
// utterance equals snr_db. Shorter noise is tiled cyclically, longer trimmed.
Waveform mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db);

// Gain applied to the noise by mix_at_snr.
double snr_gain(const Waveform& clean, const Waveform& noise, double snr_db);

// Zero-phase FIR band-limiting. Missing cutoffs are identity.
Waveform bandlimit(const Waveform& w, std::optional<double> lowpass_hz,
                   std::optional<double> highpass_hz);

// Samplewise hard clamp to [-threshold, threshold].
Waveform clip(const Waveform& w, double threshold);

// Zeroes each (start, duration) region; everything else is bit-identical.
// Overlapping regions are merged.
Waveform packet_drop(const Waveform& w,
                     const std::vector<std::pair<double, double>>& drops);

// Rotate noise by a seeded offset and tile/trim to target_len samples.
Waveform prepare_noise(const Waveform& noise, int64_t target_len, uint64_t seed);

// Deterministic composition: bandlimit -> clip -> mix_at_snr -> packet_drop.
Waveform apply_spec(const Waveform& clean, const DegradationSpec& spec,
                    const NoiseBank& bank);

}  // namespace revoice

#endif  // REVOICE_DEGRADE_H_
