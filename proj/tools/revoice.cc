// tools/revoice.cc
//
// Two-stage speech restoration CLI: noise suppression followed by
// diffusion-based, speaker-conditioned resynthesis, plus corpus tooling,
// evaluation, and reporting.
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "revoice/base/error.h"
#include "revoice/degrade.h"
#include "revoice/harness/config.h"
#include "revoice/harness/corpus.h"
#include "revoice/harness/figure.h"
#include "revoice/harness/pipeline.h"
#include "revoice/harness/toy.h"
#include "revoice/mel.h"
#include "revoice/ns/model.h"
#include "revoice/vc/model.h"

namespace fs = std::filesystem;
using namespace revoice;

namespace {

harness::ExperimentConfig config_from(const std::string& path) {
  if (path.empty()) return harness::ExperimentConfig{};
  return harness::load_experiment_config(path);
}

int run(int argc, char** argv) {
  CLI::App app{"revoice: two-stage speech restoration (noise suppression + "
               "diffusion voice-conversion resynthesis)"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags override its keys")
      ->check(CLI::ExistingFile);

  // ---- synth-corpus ----
  auto* synth = app.add_subcommand("synth-corpus", "generate the deterministic toy corpus");
  std::string synth_out = "toy_corpus";
  int synth_speakers = 4, synth_utts = 24;
  uint64_t synth_seed = 1;
  synth->add_option("--out-dir", synth_out, "output directory");
  synth->add_option("--speakers", synth_speakers, "number of speakers");
  synth->add_option("--utts", synth_utts, "utterances per speaker");
  synth->add_option("--seed", synth_seed, "corpus seed");

  // ---- degrade ----
  auto* degrade_cmd = app.add_subcommand("degrade", "apply a degradation manifest");
  std::string degrade_manifest, degrade_noise_dir, degrade_out_dir;
  degrade_cmd->add_option("--manifest", degrade_manifest, "degradation manifest (jsonl)")
      ->required();
  degrade_cmd->add_option("--noise-dir", degrade_noise_dir, "directory of noise wavs")
      ->required();
  degrade_cmd->add_option("--out-dir", degrade_out_dir, "output directory")->required();

  // ---- train-ns ----
  auto* train_ns_cmd = app.add_subcommand("train-ns", "train the noise-suppression stage");
  std::string tns_manifest, tns_noise_dir, tns_out = "ns.ckpt";
  int tns_epochs = -1;
  uint64_t tns_seed = 0;
  bool tns_have_seed = false;
  train_ns_cmd->add_option("--manifest", tns_manifest, "corpus manifest (jsonl)");
  train_ns_cmd->add_option("--noise-dir", tns_noise_dir, "directory of noise wavs");
  train_ns_cmd->add_option("--out", tns_out, "checkpoint output path");
  train_ns_cmd->add_option("--epochs", tns_epochs, "training epochs");
  train_ns_cmd->add_option("--seed", tns_seed, "seed override")
      ->each([&](const std::string&) { tns_have_seed = true; });

  // ---- train-vc ----
  auto* train_vc_cmd = app.add_subcommand("train-vc", "stage-1 training of the restoration model");
  std::string tvc_manifest, tvc_out = "vc.ckpt";
  int tvc_epochs = -1;
  train_vc_cmd->add_option("--manifest", tvc_manifest, "corpus manifest (jsonl)");
  train_vc_cmd->add_option("--out", tvc_out, "checkpoint output path");
  train_vc_cmd->add_option("--epochs", tvc_epochs, "training epochs");

  // ---- adapt-vc ----
  auto* adapt_cmd = app.add_subcommand("adapt-vc", "content-encoder adaptation on noisy inputs");
  std::string avc_manifest, avc_noise_dir, avc_vc, avc_ns, avc_out = "vc_adapted.ckpt";
  int avc_epochs = -1;
  adapt_cmd->add_option("--manifest", avc_manifest, "corpus manifest (jsonl)");
  adapt_cmd->add_option("--noise-dir", avc_noise_dir, "directory of noise wavs");
  adapt_cmd->add_option("--vc", avc_vc, "stage-1 vc checkpoint")->required();
  adapt_cmd->add_option("--ns", avc_ns, "ns checkpoint")->required();
  adapt_cmd->add_option("--out", avc_out, "checkpoint output path");
  adapt_cmd->add_option("--epochs", avc_epochs, "adaptation epochs");

  // ---- restore ----
  auto* restore_cmd = app.add_subcommand("restore", "restore one noisy wav");
  std::string r_in, r_ref, r_ns, r_vc, r_out = "restored.wav";
  int r_steps = -1;
  double r_guidance = -1.0;
  uint64_t r_seed = 7;
  bool r_no_vq = false, r_skip_ns = false;
  restore_cmd->add_option("--in", r_in, "noisy input wav")->required();
  restore_cmd->add_option("--ref", r_ref, "clean reference wav of the target speaker")->required();
  restore_cmd->add_option("--ns", r_ns, "ns checkpoint");
  restore_cmd->add_option("--vc", r_vc, "vc checkpoint")->required();
  restore_cmd->add_option("--out", r_out, "output wav");
  restore_cmd->add_option("--steps", r_steps, "reverse diffusion steps");
  restore_cmd->add_option("--guidance", r_guidance, "classifier-free guidance weight");
  restore_cmd->add_option("--seed", r_seed, "sampler seed");
  restore_cmd->add_flag("--no-vq", r_no_vq, "pass dense content features (VQ ablation)");
  restore_cmd->add_flag("--skip-ns", r_skip_ns, "restoration-only (no NS stage)");

  // ---- evaluate ----
  auto* eval_cmd = app.add_subcommand("evaluate", "build the eval set and score systems");
  std::string e_manifest, e_noise_dir, e_work, e_ns, e_vc, e_vc_ae, e_speaker;
  std::vector<std::string> e_modes = {"noisy"};
  uint64_t e_seed = 0;
  bool e_have_seed = false;
  eval_cmd->add_option("--manifest", e_manifest, "corpus manifest (jsonl)");
  eval_cmd->add_option("--noise-dir", e_noise_dir, "directory of noise wavs");
  eval_cmd->add_option("--work-dir", e_work, "working directory");
  eval_cmd->add_option("--ns", e_ns, "ns checkpoint");
  eval_cmd->add_option("--vc", e_vc, "vc checkpoint (clean stage, used for vc_e)");
  eval_cmd->add_option("--vc-ae", e_vc_ae, "adapted vc checkpoint (used for vc_ae)");
  eval_cmd->add_option("--speaker-ckpt", e_speaker, "embedder checkpoint for SECS");
  eval_cmd->add_option("--modes", e_modes, "systems to run: noisy ns_only vc_e vc_ae");
  eval_cmd->add_option("--seed", e_seed, "seed override")
      ->each([&](const std::string&) { e_have_seed = true; });

  // ---- report ----
  auto* report_cmd = app.add_subcommand("report", "aggregate report jsonl into tables");
  std::vector<std::string> rep_inputs;
  std::string rep_csv;
  report_cmd->add_option("inputs", rep_inputs, "report jsonl files")->required();
  report_cmd->add_option("--csv", rep_csv, "also write a summary csv");

  // ---- figure ----
  auto* figure_cmd = app.add_subcommand("figure", "render the three-panel comparison figure");
  std::string f_noisy, f_ns, f_restored, f_out = "figure.png";
  figure_cmd->add_option("--noisy", f_noisy, "noisy input wav")->required();
  figure_cmd->add_option("--ns", f_ns, "ns output wav")->required();
  figure_cmd->add_option("--restored", f_restored, "restored output wav")->required();
  figure_cmd->add_option("--out", f_out, "output png");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  harness::ExperimentConfig config = config_from(config_path);

  if (synth->parsed()) {
    harness::ToyCorpusOptions options;
    options.num_speakers = synth_speakers;
    options.utterances_per_speaker = synth_utts;
    options.seed = synth_seed;
    harness::synth_toy_corpus(synth_out, options);
    std::cout << "corpus written to " << synth_out << " ("
              << synth_speakers * synth_utts << " utterances)\n";
    std::cout << "manifest: " << (fs::path(synth_out) / "corpus.jsonl").string() << "\n";
    return 0;
  }

  if (degrade_cmd->parsed()) {
    const auto specs = read_degradation_manifest(degrade_manifest);
    NoiseBank bank(degrade_noise_dir);
    fs::create_directories(degrade_out_dir);
    for (const auto& spec : specs) {
      const Waveform clean = read_wav(spec.clean_path);
      const Waveform degraded = apply_spec(clean, spec, bank);
      write_wav((fs::path(degrade_out_dir) / (spec.utt_id + ".wav")).string(), degraded);
    }
    std::cout << specs.size() << " degraded files written to " << degrade_out_dir << "\n";
    return 0;
  }

  if (train_ns_cmd->parsed()) {
    if (!tns_manifest.empty()) config.corpus_manifest = tns_manifest;
    if (!tns_noise_dir.empty()) config.noise_dir = tns_noise_dir;
    if (tns_epochs > 0) config.ns_epochs = tns_epochs;
    if (tns_have_seed) config.seed = tns_seed;
    const auto manifest = harness::load_corpus_manifest(config.corpus_manifest);
    NoiseBank bank(config.noise_dir);
    harness::train_ns_driver(config, manifest, bank, tns_out);
    std::cout << "ns checkpoint written to " << tns_out << "\n";
    return 0;
  }

  if (train_vc_cmd->parsed()) {
    if (!tvc_manifest.empty()) config.corpus_manifest = tvc_manifest;
    if (tvc_epochs > 0) config.vc_epochs = tvc_epochs;
    const auto manifest = harness::load_corpus_manifest(config.corpus_manifest);
    harness::train_vc_driver(config, manifest, tvc_out);
    std::cout << "vc checkpoint written to " << tvc_out << "\n";
    return 0;
  }

  if (adapt_cmd->parsed()) {
    if (!avc_manifest.empty()) config.corpus_manifest = avc_manifest;
    if (!avc_noise_dir.empty()) config.noise_dir = avc_noise_dir;
    if (avc_epochs > 0) config.adapt_epochs = avc_epochs;
    const auto manifest = harness::load_corpus_manifest(config.corpus_manifest);
    NoiseBank bank(config.noise_dir);
    harness::adapt_vc_driver(config, manifest, bank, avc_vc, avc_ns, avc_out);
    std::cout << "adapted vc checkpoint written to " << avc_out << "\n";
    return 0;
  }

  if (restore_cmd->parsed()) {
    const Waveform noisy = read_wav(r_in);
    const Waveform ref = read_wav(r_ref);
    vc::VcTrainState vc_state = vc::load_vc_checkpoint(r_vc);
    if (r_no_vq) vc_state.model.mutable_config().use_vq = false;

    MelSpectrogram content_mel;
    if (r_skip_ns) {
      content_mel = mel_analyze(noisy);
    } else {
      if (r_ns.empty()) {
        throw UsageError("restore: --ns checkpoint required unless --skip-ns is given");
      }
      ns::NsTrainState ns_state = ns::load_ns_checkpoint(r_ns);
      content_mel = ns::ns_enhance(ns_state.model, noisy, config.griffin_lim_iterations).second;
    }
    vc::RestoreOptions options;
    if (r_steps > 0) options.steps = r_steps; else options.steps = config.diffusion_steps;
    options.guidance_w = r_guidance >= 0.0 ? r_guidance : config.guidance_w;
    options.seed = r_seed;
    options.griffin_lim_iterations = config.griffin_lim_iterations;
    const Waveform restored = vc::restore(vc_state.model, content_mel, ref, options);
    write_wav(r_out, restored);
    std::cout << "restored wav written to " << r_out << "\n";
    return 0;
  }

  if (eval_cmd->parsed()) {
    if (!e_manifest.empty()) config.corpus_manifest = e_manifest;
    if (!e_noise_dir.empty()) config.noise_dir = e_noise_dir;
    if (!e_work.empty()) config.work_dir = e_work;
    if (!e_ns.empty()) config.ns_ckpt = e_ns;
    if (!e_speaker.empty()) config.speaker_ckpt = e_speaker;
    if (e_have_seed) config.seed = e_seed;

    const auto manifest = harness::load_corpus_manifest(config.corpus_manifest);
    NoiseBank bank(config.noise_dir);
    const harness::EvalSet eval_set = harness::build_eval_set(manifest, config, bank);

    std::vector<metrics::MetricReport> all;
    int warnings = 0;
    for (const auto& mode_name : e_modes) {
      const harness::PipelineMode mode = harness::pipeline_mode_from_string(mode_name);
      harness::ExperimentConfig mode_config = config;
      if (mode == harness::PipelineMode::kVcE && !e_vc.empty()) mode_config.vc_ckpt = e_vc;
      if (mode == harness::PipelineMode::kVcAe && !e_vc_ae.empty()) mode_config.vc_ckpt = e_vc_ae;
      harness::PipelineResult result = harness::run_pipeline(mode_config, mode, eval_set);
      warnings += result.warning_count;
      all.insert(all.end(), result.reports.begin(), result.reports.end());
    }

    const fs::path report_path = fs::path(config.work_dir) / "report.jsonl";
    harness::write_report_jsonl(report_path.string(), all);
    const auto rows = harness::aggregate_reports(all);
    harness::write_summary_csv((fs::path(config.work_dir) / "summary.csv").string(), rows);
    std::cout << harness::render_summary_table(rows);
    if (warnings > 0) std::cout << "external scorer warnings: " << warnings << "\n";
    std::cout << "report: " << report_path.string() << "\n";
    return 0;
  }

  if (report_cmd->parsed()) {
    std::vector<metrics::MetricReport> all;
    for (const auto& path : rep_inputs) {
      const auto reports = harness::read_report_jsonl(path);
      all.insert(all.end(), reports.begin(), reports.end());
    }
    const auto rows = harness::aggregate_reports(all);
    std::cout << harness::render_summary_table(rows);
    if (!rep_csv.empty()) harness::write_summary_csv(rep_csv, rows);
    return 0;
  }

  if (figure_cmd->parsed()) {
    const auto info = harness::emit_figure(read_wav(f_noisy), read_wav(f_ns),
                                           read_wav(f_restored), f_out);
    std::cout << "figure written to " << f_out << " (" << info.width << "x" << info.height
              << ", " << info.panels << " panels)\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
