// core/src/harness/toy.cc
#include "revoice/harness/toy.h"

#include <array>
#include <cmath>
#include <filesystem>

#include "revoice/base/error.h"
#include "revoice/base/rng.h"

namespace fs = std::filesystem;

namespace revoice::harness {

namespace {

struct Vowel {
  char letter;
  double f1, f2, f3;
};

// canonical adult-male formant targets; speakers scale them
constexpr std::array<Vowel, 5> kVowels = {{
    {'a', 730.0, 1090.0, 2440.0},
    {'e', 530.0, 1840.0, 2480.0},
    {'i', 270.0, 2290.0, 3010.0},
    {'o', 570.0, 840.0, 2410.0},
    {'u', 300.0, 870.0, 2240.0},
}};

struct SpeakerTimbre {
  double f0;
  double formant_scale;
  double tilt;      // spectral rolloff exponent
  double vibrato;   // depth
};

SpeakerTimbre speaker_timbre(int speaker_index) {
  static constexpr std::array<double, 4> kF0 = {105.0, 148.0, 196.0, 252.0};
  static constexpr std::array<double, 4> kScale = {0.88, 1.0, 1.12, 1.28};
  static constexpr std::array<double, 4> kTilt = {-0.45, -0.75, -0.6, -0.9};
  static constexpr std::array<double, 4> kVib = {0.015, 0.03, 0.022, 0.04};
  const int k = speaker_index % 4;
  const double detune = 1.0 + 0.06 * static_cast<double>(speaker_index / 4);
  return {kF0[static_cast<size_t>(k)] * detune, kScale[static_cast<size_t>(k)],
          kTilt[static_cast<size_t>(k)], kVib[static_cast<size_t>(k)]};
}

// amplitude of a harmonic at frequency f for one vowel + speaker timbre
double formant_envelope(double f, const Vowel& v, const SpeakerTimbre& spk) {
  static constexpr std::array<double, 3> kAmps = {1.0, 0.63, 0.35};
  static constexpr std::array<double, 3> kBw = {110.0, 140.0, 200.0};
  const std::array<double, 3> centers = {v.f1 * spk.formant_scale, v.f2 * spk.formant_scale,
                                         v.f3 * spk.formant_scale};
  double a = 0.0;
  for (size_t j = 0; j < 3; ++j) {
    const double d = (f - centers[j]) / (kBw[j] * 0.5);
    a += kAmps[j] / (1.0 + d * d);
  }
  return a * std::pow(std::max(f, 100.0) / 500.0, spk.tilt);
}

}  // namespace

Waveform synth_toy_utterance(int speaker_index, uint64_t seed, int sample_rate,
                             std::string* transcript) {
  Rng rng(seed);
  const SpeakerTimbre spk = speaker_timbre(speaker_index);
  const int num_syllables = 6 + static_cast<int>(rng.uniform_int(4));

  Waveform w;
  w.sample_rate = sample_rate;
  std::string text;

  double phase[24] = {0.0};
  for (int s = 0; s < num_syllables; ++s) {
    const Vowel& vowel = kVowels[rng.uniform_int(kVowels.size())];
    if (!text.empty()) text.push_back(' ');
    text.push_back(vowel.letter);

    // optional consonant-like burst
    if (rng.uniform() < 0.45) {
      const int burst_len = static_cast<int>((0.025 + 0.02 * rng.uniform()) * sample_rate);
      double b1 = 0.0, b2 = 0.0;  // crude band emphasis around 3 kHz
      const double r = 0.92, theta = 2.0 * M_PI * 3000.0 / sample_rate;
      for (int n = 0; n < burst_len; ++n) {
        const double x = rng.normal() * 0.25;
        const double y = x + 2.0 * r * std::cos(theta) * b1 - r * r * b2;
        b2 = b1;
        b1 = y;
        const double env = std::sin(M_PI * n / burst_len);
        w.samples.push_back(0.12 * y * env);
      }
      text.insert(text.size() - 1, 1, 't');
    }

    const double dur = 0.12 + 0.08 * rng.uniform();
    const int len = static_cast<int>(dur * sample_rate);
    const double decl = 1.06 - 0.16 * static_cast<double>(s) / num_syllables;
    const double jitter = 1.0 + 0.02 * (rng.uniform() - 0.5);

    // additive harmonic synthesis under the vowel's formant envelope
    const double f0_nominal = spk.f0 * decl * jitter;
    const int num_harm = std::min<int>(24, static_cast<int>(7600.0 / f0_nominal));
    std::vector<double> amps(static_cast<size_t>(num_harm));
    for (int k = 1; k <= num_harm; ++k) {
      amps[static_cast<size_t>(k - 1)] = formant_envelope(k * f0_nominal, vowel, spk);
    }
    for (int n = 0; n < len; ++n) {
      const double tt = static_cast<double>(n) / sample_rate;
      const double f0 = f0_nominal * (1.0 + spk.vibrato * std::sin(2.0 * M_PI * 5.3 * tt));
      const double env = std::min({1.0, n / (0.015 * sample_rate),
                                   (len - 1 - n) / (0.03 * sample_rate)});
      double v = 0.0;
      for (int k = 1; k <= num_harm; ++k) {
        phase[k - 1] += 2.0 * M_PI * k * f0 / sample_rate;
        v += amps[static_cast<size_t>(k - 1)] * std::sin(phase[k - 1]);
      }
      w.samples.push_back(0.18 * env * v / std::sqrt(static_cast<double>(num_harm)));
    }

    // inter-syllable gap
    const int gap = static_cast<int>((0.015 + 0.03 * rng.uniform()) * sample_rate);
    for (int n = 0; n < gap; ++n) w.samples.push_back(0.0);
  }

  // pad to at least 1.2 s
  const size_t min_len = static_cast<size_t>(1.2 * sample_rate);
  while (w.samples.size() < min_len) w.samples.push_back(0.0);

  // normalize to a fixed RMS with headroom
  const double r = rms(w.samples);
  if (r > 1e-9) {
    const double g = 0.08 / r;
    for (auto& s : w.samples) s = std::clamp(s * g, -0.99, 0.99);
  }
  if (transcript != nullptr) *transcript = text;
  return w;
}

namespace {

Waveform make_noise(const std::string& kind, int sample_rate, double seconds, Rng& rng) {
  Waveform w;
  w.sample_rate = sample_rate;
  const int len = static_cast<int>(seconds * sample_rate);
  w.samples.resize(static_cast<size_t>(len));
  if (kind == "white") {
    for (auto& s : w.samples) s = rng.normal();
  } else if (kind == "pink") {
    double y = 0.0;
    for (auto& s : w.samples) {
      y = 0.97 * y + rng.normal();
      s = y;
    }
  } else if (kind == "hum") {
    for (int n = 0; n < len; ++n) {
      const double t = static_cast<double>(n) / sample_rate;
      w.samples[static_cast<size_t>(n)] = std::sin(2.0 * M_PI * 50.0 * t) +
                                          0.5 * std::sin(2.0 * M_PI * 100.0 * t) +
                                          0.25 * std::sin(2.0 * M_PI * 150.0 * t) +
                                          0.15 * rng.normal();
    }
  } else {  // babble: overlapped pseudo-speakers outside the corpus range
    std::fill(w.samples.begin(), w.samples.end(), 0.0);
    for (int v = 0; v < 8; ++v) {
      std::string ignored;
      const Waveform u = synth_toy_utterance(100 + v, rng.fork(static_cast<uint64_t>(v)),
                                             sample_rate, &ignored);
      const size_t offset = rng.uniform_int(static_cast<uint64_t>(len));
      for (size_t i = 0; i < u.samples.size(); ++i) {
        w.samples[(offset + i) % w.samples.size()] += u.samples[i];
      }
    }
  }
  const double r = rms(w.samples);
  if (r > 1e-9) {
    for (auto& s : w.samples) s = std::clamp(s * 0.1 / r, -0.99, 0.99);
  }
  return w;
}

}  // namespace

CorpusManifest synth_toy_corpus(const std::string& out_dir, const ToyCorpusOptions& options) {
  if (options.num_speakers < 1 || options.utterances_per_speaker < 3) {
    throw DataError("toy corpus: need >= 1 speaker and >= 3 utterances each");
  }
  fs::create_directories(fs::path(out_dir) / "wav");
  fs::create_directories(fs::path(out_dir) / "noise");

  CorpusManifest manifest;
  for (int spk = 0; spk < options.num_speakers; ++spk) {
    for (int u = 0; u < options.utterances_per_speaker; ++u) {
      CorpusEntry e;
      char buf[64];
      std::snprintf(buf, sizeof(buf), "p%02d_u%03d", spk, u);
      e.utt_id = buf;
      std::snprintf(buf, sizeof(buf), "p%02d", spk);
      e.speaker_id = buf;
      const uint64_t seed = mix_seed(options.seed, static_cast<uint64_t>(spk) * 1000 + u);
      const Waveform w = synth_toy_utterance(spk, seed, options.sample_rate, &e.transcript);
      e.wav_path = (fs::path(out_dir) / "wav" / (e.utt_id + ".wav")).string();
      write_wav(e.wav_path, w);

      const double frac = static_cast<double>(u) / options.utterances_per_speaker;
      if (frac < options.train_fraction) {
        e.split = Split::kTrain;
      } else if (frac < options.train_fraction + options.adapt_fraction) {
        e.split = Split::kAdapt;
      } else {
        e.split = Split::kEval;
      }
      manifest.entries.push_back(std::move(e));
    }
  }

  Rng noise_rng(mix_seed(options.seed, 0x4e30));
  for (const char* kind : {"white", "pink", "hum", "babble"}) {
    const Waveform n = make_noise(kind, options.sample_rate, 4.0, noise_rng);
    write_wav((fs::path(out_dir) / "noise" / (std::string(kind) + ".wav")).string(), n);
  }

  save_corpus_manifest((fs::path(out_dir) / "corpus.jsonl").string(), manifest);
  return manifest;
}

}  // namespace revoice::harness
