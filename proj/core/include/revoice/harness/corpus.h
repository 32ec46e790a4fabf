// core/include/revoice/harness/corpus.h
#ifndef REVOICE_HARNESS_CORPUS_H_
#define REVOICE_HARNESS_CORPUS_H_

#include <string>
#include <vector>

namespace revoice::harness {

enum class Split { kTrain, kAdapt, kEval };

std::string to_string(Split split);
Split split_from_string(const std::string& s);

struct CorpusEntry {
  std::string utt_id;
  std::string speaker_id;
  std::string wav_path;
  std::string transcript;
  Split split = Split::kTrain;
};

struct CorpusManifest {
  std::vector<CorpusEntry> entries;

  std::vector<const CorpusEntry*> split_entries(Split split) const;
  std::vector<std::string> speakers() const;  // sorted unique ids
  // Longest clean clip of the speaker outside the eval split (the reference
  // clip used for restoration and SECS). Throws DataError if none exists.
  const CorpusEntry& reference_clip(const std::string& speaker_id) const;
};

// JSON-lines manifest {utt_id, speaker_id, wav_path, transcript, split}.
// Validates utt_id uniqueness and that every wav is readable at load time.
CorpusManifest load_corpus_manifest(const std::string& path, bool check_wavs = true);
void save_corpus_manifest(const std::string& path, const CorpusManifest& manifest);

}  // namespace revoice::harness

#endif  // REVOICE_HARNESS_CORPUS_H_
