// core/src/harness/pipeline.cc
#include "revoice/harness/pipeline.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include <json.hpp>

#include "revoice/base/error.h"
#include "revoice/base/rng.h"
#include "revoice/harness/external.h"
#include "revoice/metrics/align.h"
#include "revoice/metrics/stoi.h"
#include "revoice/metrics/text.h"
#include "revoice/ns/model.h"
#include "revoice/vc/model.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace revoice::harness {

std::string to_string(PipelineMode mode) {
  switch (mode) {
    case PipelineMode::kNoisy: return "noisy";
    case PipelineMode::kNsOnly: return "ns_only";
    case PipelineMode::kVcE: return "vc_e";
    case PipelineMode::kVcAe: return "vc_ae";
  }
  return "noisy";
}

PipelineMode pipeline_mode_from_string(const std::string& s) {
  if (s == "noisy") return PipelineMode::kNoisy;
  if (s == "ns_only") return PipelineMode::kNsOnly;
  if (s == "vc_e") return PipelineMode::kVcE;
  if (s == "vc_ae") return PipelineMode::kVcAe;
  throw UsageError("unknown pipeline mode: " + s);
}

namespace {

std::string snr_tag(double snr_db) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "snr%+05.1f", snr_db);
  return buf;
}

}  // namespace

EvalSet build_eval_set(const CorpusManifest& manifest, const ExperimentConfig& config,
                       const NoiseBank& bank) {
  config.check();
  const auto eval_entries = manifest.split_entries(Split::kEval);
  if (eval_entries.empty()) throw DataError("build_eval_set: eval split is empty");
  const std::vector<std::string> noise_ids = bank.ids();
  if (noise_ids.empty()) throw DataError("build_eval_set: noise bank is empty");

  const fs::path eval_dir = fs::path(config.work_dir) / "eval";
  fs::create_directories(eval_dir);

  // reference clips resolved once per speaker
  std::map<std::string, const CorpusEntry*> refs;
  for (const auto* e : eval_entries) {
    if (!refs.count(e->speaker_id)) {
      refs[e->speaker_id] = &manifest.reference_clip(e->speaker_id);
    }
  }

  EvalSet out;
  std::vector<DegradationSpec> specs;
  size_t item = 0;
  for (const auto* e : eval_entries) {
    const Waveform clean = read_wav(e->wav_path);
    for (double snr : config.snr_grid) {
      DegradationSpec spec;
      spec.utt_id = e->utt_id + "__" + snr_tag(snr);
      spec.clean_path = e->wav_path;
      spec.noise_id = noise_ids[item % noise_ids.size()];
      spec.snr_db = snr;
      spec.seed = mix_seed(config.seed, item);
      spec.check();

      const Waveform degraded = apply_spec(clean, spec, bank);
      EvalEntry entry;
      entry.degraded_id = spec.utt_id;
      entry.base_utt = e->utt_id;
      entry.speaker_id = e->speaker_id;
      entry.transcript = e->transcript;
      entry.snr_db = snr;
      entry.wav_path = (eval_dir / (spec.utt_id + ".wav")).string();
      entry.clean_path = e->wav_path;
      entry.ref_utt_id = refs[e->speaker_id]->utt_id;
      entry.ref_wav_path = refs[e->speaker_id]->wav_path;
      write_wav(entry.wav_path, degraded);

      specs.push_back(std::move(spec));
      out.entries.push_back(std::move(entry));
      ++item;
    }
  }

  out.degradation_manifest_path = (eval_dir / "degradations.jsonl").string();
  write_degradation_manifest(out.degradation_manifest_path, specs);

  out.index_path = (eval_dir / "index.jsonl").string();
  std::ofstream idx(out.index_path);
  if (!idx) throw DataError("cannot write eval index: " + out.index_path);
  for (const auto& entry : out.entries) {
    json j;
    j["degraded_id"] = entry.degraded_id;
    j["base_utt"] = entry.base_utt;
    j["speaker_id"] = entry.speaker_id;
    j["transcript"] = entry.transcript;
    j["snr_db"] = entry.snr_db;
    j["wav_path"] = entry.wav_path;
    j["clean_path"] = entry.clean_path;
    j["ref_utt_id"] = entry.ref_utt_id;
    j["ref_wav_path"] = entry.ref_wav_path;
    idx << j.dump() << "\n";
  }
  return out;
}

EvalSet load_eval_set(const std::string& index_path) {
  std::ifstream in(index_path);
  if (!in) throw DataError("cannot open eval index: " + index_path);
  EvalSet out;
  out.index_path = index_path;
  out.degradation_manifest_path =
      (fs::path(index_path).parent_path() / "degradations.jsonl").string();
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    EvalEntry e;
    e.degraded_id = j.at("degraded_id").get<std::string>();
    e.base_utt = j.at("base_utt").get<std::string>();
    e.speaker_id = j.at("speaker_id").get<std::string>();
    e.transcript = j.value("transcript", "");
    e.snr_db = j.at("snr_db").get<double>();
    e.wav_path = j.at("wav_path").get<std::string>();
    e.clean_path = j.at("clean_path").get<std::string>();
    e.ref_utt_id = j.value("ref_utt_id", "");
    e.ref_wav_path = j.value("ref_wav_path", "");
    out.entries.push_back(std::move(e));
  }
  return out;
}

namespace {

// lazily-loaded model bundle for one pipeline run
struct ModeModels {
  std::unique_ptr<ns::NsTrainState> ns_state;
  std::unique_ptr<vc::VcTrainState> vc_state;
  std::unique_ptr<vc::VcTrainState> secs_state;  // embedder for SECS only
};

ModeModels load_mode_models(const ExperimentConfig& config, PipelineMode mode) {
  ModeModels m;
  const bool needs_ns =
      (mode == PipelineMode::kNsOnly || mode == PipelineMode::kVcE || mode == PipelineMode::kVcAe) &&
      !(config.skip_ns && mode != PipelineMode::kNsOnly);
  if (needs_ns) {
    if (config.ns_ckpt.empty()) {
      throw ModelError("mode " + to_string(mode) + " requires --ns checkpoint");
    }
    m.ns_state = std::make_unique<ns::NsTrainState>(ns::load_ns_checkpoint(config.ns_ckpt));
  }
  if (mode == PipelineMode::kVcE || mode == PipelineMode::kVcAe) {
    if (config.vc_ckpt.empty()) {
      throw ModelError("mode " + to_string(mode) + " requires --vc checkpoint");
    }
    m.vc_state = std::make_unique<vc::VcTrainState>(vc::load_vc_checkpoint(config.vc_ckpt));
    // stage tags are part of the contract: vc_e wants clean-stage weights,
    // vc_ae wants adapted weights
    if (mode == PipelineMode::kVcE && m.vc_state->stage != vc::TrainStage::kClean) {
      throw ModelError("vc_e requires a clean-stage checkpoint but " + config.vc_ckpt +
                       " is stage 'adapted'");
    }
    if (mode == PipelineMode::kVcAe && m.vc_state->stage != vc::TrainStage::kAdapted) {
      throw ModelError("vc_ae requires an adapted checkpoint but " + config.vc_ckpt +
                       " is stage 'clean'");
    }
    if (m.vc_state->model.config().codebook_size != config.codebook_size) {
      throw ModelError("checkpoint/config mismatch: codebook_size " +
                       std::to_string(m.vc_state->model.config().codebook_size) + " vs " +
                       std::to_string(config.codebook_size));
    }
    if (config.no_vq) m.vc_state->model.mutable_config().use_vq = false;
  }
  if (!config.speaker_ckpt.empty()) {
    m.secs_state = std::make_unique<vc::VcTrainState>(vc::load_vc_checkpoint(config.speaker_ckpt));
  }
  return m;
}

}  // namespace

PipelineResult run_pipeline(const ExperimentConfig& config, PipelineMode mode,
                            const EvalSet& eval_set) {
  config.check();
  if (eval_set.entries.empty()) throw DataError("run_pipeline: empty eval set");
  ModeModels models = load_mode_models(config, mode);
  ExternalClientConfig external{config.asr_url, config.mos_url};

  PipelineResult result;
  const fs::path out_dir = fs::path(config.work_dir) / "out" / to_string(mode);
  fs::create_directories(out_dir);

  for (const auto& entry : eval_set.entries) {
    const Waveform clean = read_wav(entry.clean_path);
    const Waveform degraded = read_wav(entry.wav_path);

    // ---- mode output ----
    Waveform output;
    if (mode == PipelineMode::kNoisy) {
      output = degraded;
    } else if (mode == PipelineMode::kNsOnly) {
      output = ns_enhance(models.ns_state->model, degraded, config.griffin_lim_iterations).first;
    } else {
      MelSpectrogram content_mel;
      if (config.skip_ns || models.ns_state == nullptr) {
        content_mel = mel_analyze(degraded);
      } else {
        content_mel =
            ns_enhance(models.ns_state->model, degraded, config.griffin_lim_iterations).second;
      }
      const Waveform ref = read_wav(entry.ref_wav_path);
      vc::RestoreOptions options;
      options.steps = config.diffusion_steps;
      options.guidance_w = config.guidance_w;
      options.seed = mix_seed(config.seed, std::hash<std::string>{}(entry.degraded_id));
      options.griffin_lim_iterations = config.griffin_lim_iterations;
      output = vc::restore(models.vc_state->model, content_mel, ref, options);
    }
    const std::string out_path = (out_dir / (entry.degraded_id + ".wav")).string();
    write_wav(out_path, output);

    // ---- metrics ----
    metrics::MetricReport report;
    report.utt_id = entry.degraded_id;
    report.mode = to_string(mode);
    report.snr_condition_db = entry.snr_db;
    report.ref_utt_id = entry.ref_utt_id;

    const int64_t max_lag = std::max<int64_t>(
        8, static_cast<int64_t>(config.max_align_lag_seconds * clean.sample_rate));
    metrics::AlignResult aligned = metrics::gcc_phat_align(clean, output, max_lag);
    report.alignment_lag = aligned.lag;
    report.stoi = metrics::stoi(clean, aligned.aligned_est);
    report.lsd = metrics::lsd(mel_analyze(clean), mel_analyze(aligned.aligned_est));

    if (models.secs_state != nullptr) {
      vc::VcModel& embedder = models.secs_state->model;
      const Waveform ref = read_wav(entry.ref_wav_path);
      const vc::SpeakerEmbedding a = embedder.speaker_encode(output);
      const vc::SpeakerEmbedding b = embedder.speaker_encode(ref);
      report.secs = metrics::secs(a.vector, b.vector);
    }

    if (external.configured()) {
      const ExternalScore ext = external_score(external, out_path);
      result.warning_count += ext.warnings;
      report.mos = ext.mos;
      if (ext.transcript) {
        report.transcript = ext.transcript;
        if (!entry.transcript.empty()) {
          report.cer = metrics::cer(entry.transcript, *ext.transcript);
        }
      }
    }
    result.reports.push_back(std::move(report));
  }
  return result;
}

void write_report_jsonl(const std::string& path,
                        const std::vector<metrics::MetricReport>& reports) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report: " + path);
  for (const auto& r : reports) out << metrics::metric_report_to_json(r) << "\n";
}

std::vector<metrics::MetricReport> read_report_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report: " + path);
  std::vector<metrics::MetricReport> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(metrics::metric_report_from_json(line));
  }
  return out;
}

namespace {

struct Accumulator {
  int count = 0;
  std::map<std::string, std::pair<double, int>> sums;  // metric -> (sum, n)

  void add(const metrics::MetricReport& r) {
    ++count;
    auto put = [&](const char* key, const std::optional<double>& v) {
      if (v) {
        sums[key].first += *v;
        sums[key].second += 1;
      }
    };
    put("stoi", r.stoi);
    put("secs", r.secs);
    put("cer", r.cer);
    put("lsd", r.lsd);
    put("mos", r.mos);
  }

  std::map<std::string, double> means() const {
    std::map<std::string, double> out;
    for (const auto& [k, sn] : sums) {
      if (sn.second > 0) out[k] = sn.first / sn.second;
    }
    return out;
  }
};

}  // namespace

std::vector<SnrRow> aggregate_reports(const std::vector<metrics::MetricReport>& reports) {
  std::map<std::string, std::map<double, Accumulator>> by_mode_snr;
  std::map<std::string, Accumulator> by_mode;
  for (const auto& r : reports) {
    by_mode_snr[r.mode][r.snr_condition_db].add(r);
    by_mode[r.mode].add(r);
  }
  std::vector<SnrRow> rows;
  for (const auto& [mode, snr_map] : by_mode_snr) {
    for (const auto& [snr, acc] : snr_map) {
      SnrRow row;
      row.mode = mode;
      row.snr_db = snr;
      row.count = acc.count;
      row.means = acc.means();
      rows.push_back(std::move(row));
    }
    SnrRow avg;
    avg.mode = mode;
    avg.is_average = true;
    avg.count = by_mode[mode].count;
    avg.means = by_mode[mode].means();
    rows.push_back(std::move(avg));
  }
  return rows;
}

std::string render_summary_table(const std::vector<SnrRow>& rows) {
  static const std::vector<std::string> kMetrics = {"stoi", "secs", "lsd", "cer", "mos"};
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-8s %-8s %6s", "mode", "snr", "n");
  out += buf;
  for (const auto& m : kMetrics) {
    std::snprintf(buf, sizeof(buf), " %8s", m.c_str());
    out += buf;
  }
  out += "\n";
  for (const auto& row : rows) {
    if (row.is_average) {
      std::snprintf(buf, sizeof(buf), "%-8s %-8s %6d", row.mode.c_str(), "avg", row.count);
    } else {
      std::snprintf(buf, sizeof(buf), "%-8s %-8.1f %6d", row.mode.c_str(), row.snr_db, row.count);
    }
    out += buf;
    for (const auto& m : kMetrics) {
      auto it = row.means.find(m);
      if (it == row.means.end()) {
        std::snprintf(buf, sizeof(buf), " %8s", "-");
      } else {
        std::snprintf(buf, sizeof(buf), " %8.4f", it->second);
      }
      out += buf;
    }
    out += "\n";
  }
  return out;
}

void write_summary_csv(const std::string& path, const std::vector<SnrRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write summary csv: " + path);
  out << "mode,snr_db,count,stoi,secs,lsd,cer,mos\n";
  char buf[64];
  for (const auto& row : rows) {
    out << row.mode << ",";
    if (row.is_average) {
      out << "avg";
    } else {
      std::snprintf(buf, sizeof(buf), "%.1f", row.snr_db);
      out << buf;
    }
    out << "," << row.count;
    for (const char* m : {"stoi", "secs", "lsd", "cer", "mos"}) {
      auto it = row.means.find(m);
      if (it == row.means.end()) {
        out << ",";
      } else {
        std::snprintf(buf, sizeof(buf), "%.6f", it->second);
        out << "," << buf;
      }
    }
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// training drivers

namespace {

struct MelCache {
  std::map<std::string, MelSpectrogram> mels;

  const MelSpectrogram& get(const std::string& wav_path) {
    auto it = mels.find(wav_path);
    if (it != mels.end()) return it->second;
    return mels.emplace(wav_path, mel_analyze(read_wav(wav_path))).first->second;
  }
};

// seeded per-item degradation for training: noise at a grid SNR + optional drop
Waveform degrade_for_training(const Waveform& clean, const NoiseBank& bank,
                              const std::vector<double>& snr_grid, double drop_prob,
                              uint64_t seed) {
  Rng rng(seed);
  const auto ids = bank.ids();
  DegradationSpec spec;
  spec.utt_id = "train";
  spec.noise_id = ids[rng.uniform_int(ids.size())];
  spec.snr_db = snr_grid[rng.uniform_int(snr_grid.size())];
  spec.seed = rng.fork(1);
  if (drop_prob > 0.0 && rng.uniform() < drop_prob && clean.duration_seconds() > 0.5) {
    const double start = rng.uniform() * (clean.duration_seconds() - 0.2);
    spec.drops.emplace_back(start, 0.1);
  }
  return apply_spec(clean, spec, bank);
}

}  // namespace

std::string train_ns_driver(const ExperimentConfig& config, const CorpusManifest& manifest,
                            const NoiseBank& bank, const std::string& out_path) {
  const auto train = manifest.split_entries(Split::kTrain);
  if (train.empty()) throw DataError("train-ns: train split is empty");

  ns::NsConfig ns_config;
  ns_config.channels = config.ns_channels;
  ns_config.depth = config.ns_depth;
  ns_config.lr = config.ns_lr;
  ns_config.seed = config.seed;
  ns::NsTrainState state = ns::make_ns_train_state(ns_config);

  MelCache cache;
  Rng rng(mix_seed(config.seed, 0x4e53));
  const int steps_per_epoch =
      std::max<int>(1, static_cast<int>(train.size()) / config.batch_size);
  for (int epoch = 0; epoch < config.ns_epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (int s = 0; s < steps_per_epoch; ++s) {
      std::vector<MelSpectrogram> noisy_mels;
      std::vector<std::pair<const MelSpectrogram*, const MelSpectrogram*>> batch;
      noisy_mels.reserve(static_cast<size_t>(config.batch_size));
      for (int b = 0; b < config.batch_size; ++b) {
        const CorpusEntry* e = train[rng.uniform_int(train.size())];
        const Waveform clean = read_wav(e->wav_path);
        const Waveform noisy = degrade_for_training(clean, bank, config.adapt_snr_grid,
                                                    /*drop_prob=*/0.0, rng.raw());
        noisy_mels.push_back(mel_analyze(noisy));
        batch.emplace_back(&noisy_mels.back(), &cache.get(e->wav_path));
      }
      epoch_loss += ns_train_step(state, batch);
    }
    std::cerr << "[train-ns] epoch " << epoch + 1 << "/" << config.ns_epochs << " loss "
              << epoch_loss / steps_per_epoch << "\n";
  }
  save_ns_checkpoint(out_path, state);
  return out_path;
}

std::string train_vc_driver(const ExperimentConfig& config, const CorpusManifest& manifest,
                            const std::string& out_path) {
  const auto train = manifest.split_entries(Split::kTrain);
  if (train.empty()) throw DataError("train-vc: train split is empty");

  const auto speakers = manifest.speakers();
  std::map<std::string, int> speaker_index;
  for (size_t i = 0; i < speakers.size(); ++i) speaker_index[speakers[i]] = static_cast<int>(i);

  vc::VcConfig vc_config;
  vc_config.codebook_size = config.codebook_size;
  vc_config.content_dim = config.content_dim;
  vc_config.model_dim = config.model_dim;
  vc_config.score_channels = config.score_channels;
  vc_config.num_speakers = static_cast<int>(speakers.size());
  vc_config.lr = config.vc_lr;
  vc_config.use_vq = !config.no_vq;
  vc_config.seed = config.seed;
  vc::VcTrainState state = vc::make_vc_train_state(vc_config);

  MelCache cache;
  Rng rng(mix_seed(config.seed, 0x5643));
  const int steps_per_epoch =
      std::max<int>(1, static_cast<int>(train.size()) / config.batch_size);

  // phase 0: speaker-classification pretraining, then freeze the encoder
  for (int epoch = 0; epoch < config.speaker_epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (int s = 0; s < steps_per_epoch; ++s) {
      std::vector<std::pair<const MelSpectrogram*, int>> batch;
      for (int b = 0; b < config.batch_size; ++b) {
        const CorpusEntry* e = train[rng.uniform_int(train.size())];
        batch.emplace_back(&cache.get(e->wav_path), speaker_index[e->speaker_id]);
      }
      epoch_loss += vc::speaker_train_step(state, batch);
    }
    std::cerr << "[train-vc] speaker epoch " << epoch + 1 << "/" << config.speaker_epochs
              << " loss " << epoch_loss / steps_per_epoch << "\n";
  }
  state.model.freeze_speaker();

  // stage 1: clean-pair training of content path + score model
  for (int epoch = 0; epoch < config.vc_epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (int s = 0; s < steps_per_epoch; ++s) {
      std::vector<const MelSpectrogram*> batch;
      for (int b = 0; b < config.batch_size; ++b) {
        const CorpusEntry* e = train[rng.uniform_int(train.size())];
        batch.push_back(&cache.get(e->wav_path));
      }
      epoch_loss += vc::vc_train_step(state, batch, rng);
    }
    std::cerr << "[train-vc] epoch " << epoch + 1 << "/" << config.vc_epochs << " loss "
              << epoch_loss / steps_per_epoch << "\n";
  }
  save_vc_checkpoint(out_path, state);
  return out_path;
}

std::string adapt_vc_driver(const ExperimentConfig& config, const CorpusManifest& manifest,
                            const NoiseBank& bank, const std::string& vc_ckpt,
                            const std::string& ns_ckpt, const std::string& out_path) {
  auto adapt = manifest.split_entries(Split::kAdapt);
  if (adapt.empty()) adapt = manifest.split_entries(Split::kTrain);
  if (adapt.empty()) throw DataError("adapt-vc: no adaptation data");

  vc::VcTrainState state = vc::load_vc_checkpoint(vc_ckpt);
  ns::NsTrainState ns_state = ns::load_ns_checkpoint(ns_ckpt);

  MelCache cache;
  Rng rng(mix_seed(config.seed, 0x4144));
  const int steps_per_epoch =
      std::max<int>(1, static_cast<int>(adapt.size()) / config.batch_size);
  for (int epoch = 0; epoch < config.adapt_epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (int s = 0; s < steps_per_epoch; ++s) {
      std::vector<MelSpectrogram> degraded_mels;
      std::vector<vc::AdaptItem> batch;
      degraded_mels.reserve(static_cast<size_t>(config.batch_size));
      for (int b = 0; b < config.batch_size; ++b) {
        const CorpusEntry* e = adapt[rng.uniform_int(adapt.size())];
        const Waveform clean = read_wav(e->wav_path);
        const Waveform noisy = degrade_for_training(clean, bank, config.adapt_snr_grid,
                                                    config.adapt_drop_prob, rng.raw());
        // half raw noisy mels, half NS-enhanced mels
        if (rng.uniform() < config.adapt_enhanced_fraction) {
          degraded_mels.push_back(ns::ns_forward(ns_state.model, mel_analyze(noisy)));
        } else {
          degraded_mels.push_back(mel_analyze(noisy));
        }
        batch.push_back({&cache.get(e->wav_path), &degraded_mels.back()});
      }
      epoch_loss += vc::vc_adapt_step(state, batch, rng);
    }
    std::cerr << "[adapt-vc] epoch " << epoch + 1 << "/" << config.adapt_epochs << " loss "
              << epoch_loss / steps_per_epoch << "\n";
  }
  save_vc_checkpoint(out_path, state);
  return out_path;
}

}  // namespace revoice::harness
