// core/src/harness/corpus.cc
#include "revoice/harness/corpus.h"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "revoice/audio.h"
#include "revoice/base/error.h"

using nlohmann::json;

namespace revoice::harness {

std::string to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kAdapt: return "adapt";
    case Split::kEval: return "eval";
  }
  return "train";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "adapt") return Split::kAdapt;
  if (s == "eval") return Split::kEval;
  throw DataError("unknown corpus split: " + s);
}

std::vector<const CorpusEntry*> CorpusManifest::split_entries(Split split) const {
  std::vector<const CorpusEntry*> out;
  for (const auto& e : entries) {
    if (e.split == split) out.push_back(&e);
  }
  return out;
}

std::vector<std::string> CorpusManifest::speakers() const {
  std::set<std::string> ids;
  for (const auto& e : entries) ids.insert(e.speaker_id);
  return {ids.begin(), ids.end()};
}

const CorpusEntry& CorpusManifest::reference_clip(const std::string& speaker_id) const {
  const CorpusEntry* best = nullptr;
  int64_t best_len = -1;
  for (const auto& e : entries) {
    if (e.speaker_id != speaker_id || e.split == Split::kEval) continue;
    const Waveform w = read_wav(e.wav_path);
    if (w.size() > best_len) {
      best_len = w.size();
      best = &e;
    }
  }
  if (best == nullptr) {
    throw DataError("no non-eval reference clip for speaker " + speaker_id);
  }
  return *best;
}

CorpusManifest load_corpus_manifest(const std::string& path, bool check_wavs) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus manifest: " + path);
  CorpusManifest manifest;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(std::string("bad corpus manifest line: ") + e.what());
    }
    CorpusEntry e;
    e.utt_id = j.at("utt_id").get<std::string>();
    e.speaker_id = j.at("speaker_id").get<std::string>();
    e.wav_path = j.at("wav_path").get<std::string>();
    e.transcript = j.value("transcript", "");
    e.split = split_from_string(j.value("split", "train"));
    if (!seen.insert(e.utt_id).second) {
      throw DataError("duplicate utt_id in corpus manifest: " + e.utt_id);
    }
    if (check_wavs) read_wav(e.wav_path);  // must be readable at load time
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

void save_corpus_manifest(const std::string& path, const CorpusManifest& manifest) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus manifest: " + path);
  for (const auto& e : manifest.entries) {
    json j;
    j["utt_id"] = e.utt_id;
    j["speaker_id"] = e.speaker_id;
    j["wav_path"] = e.wav_path;
    j["transcript"] = e.transcript;
    j["split"] = to_string(e.split);
    out << j.dump() << "\n";
  }
}

}  // namespace revoice::harness
