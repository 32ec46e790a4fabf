// core/include/revoice/harness/toy.h
#ifndef REVOICE_HARNESS_TOY_H_
#define REVOICE_HARNESS_TOY_H_

#include <cstdint>
#include <string>

#include "revoice/audio.h"
#include "revoice/harness/corpus.h"

namespace revoice::harness {

// Deterministic formant-synthesis corpus: distinct pitch/timbre per speaker,
// shared vowel inventory across speakers, transcripts matching the vowel
// sequence. Enough structure to train every stage of the pipeline.
struct ToyCorpusOptions {
  int num_speakers = 4;
  int utterances_per_speaker = 24;
  int sample_rate = 16000;
  uint64_t seed = 1;
  double train_fraction = 0.6;
  double adapt_fraction = 0.2;  // remainder is eval
};

// Renders one utterance for (speaker_index, utterance_seed). Duration is
// 1.2 .. 2.0 s. Returns the waveform and appends the vowel transcript.
Waveform synth_toy_utterance(int speaker_index, uint64_t seed, int sample_rate,
                             std::string* transcript);

// Writes <out_dir>/wav/*.wav, <out_dir>/noise/*.wav (white, pink, hum,
// babble) and <out_dir>/corpus.jsonl. Returns the loaded manifest.
CorpusManifest synth_toy_corpus(const std::string& out_dir, const ToyCorpusOptions& options);

}  // namespace revoice::harness

#endif  // REVOICE_HARNESS_TOY_H_
