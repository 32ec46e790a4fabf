// core/src/metrics/common.cc
#include "revoice/metrics/common.h"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "revoice/base/error.h"

using nlohmann::json;

namespace revoice::metrics {

double secs(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw DataError("secs: embedding dimension mismatch");
  return a.dot(b);
}

double measured_snr(const Waveform& clean, const Waveform& mixture) {
  if (clean.samples.size() != mixture.samples.size()) {
    throw DataError("measured_snr: length mismatch");
  }
  if (clean.samples.empty()) throw DataError("measured_snr: empty input");
  double p_clean = 0.0, p_noise = 0.0;
  for (size_t i = 0; i < clean.samples.size(); ++i) {
    const double d = mixture.samples[i] - clean.samples[i];
    p_clean += clean.samples[i] * clean.samples[i];
    p_noise += d * d;
  }
  if (p_noise <= 0.0) return std::numeric_limits<double>::infinity();  // "no noise"
  return 10.0 * std::log10(p_clean / p_noise);
}

double lsd(const MelSpectrogram& a, const MelSpectrogram& b) {
  if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols()) {
    throw DataError("lsd: shape mismatch");
  }
  constexpr double kNatToDb = 10.0 / M_LN10;  // natural-log power -> dB
  double acc = 0.0;
  for (int64_t t = 0; t < a.values.rows(); ++t) {
    const double ms = ((a.values.row(t) - b.values.row(t)) * kNatToDb).array().square().mean();
    acc += std::sqrt(ms);
  }
  return acc / static_cast<double>(a.values.rows());
}

namespace {

void put_opt(json& j, const char* key, const std::optional<double>& v) {
  if (v && std::isfinite(*v)) {
    j[key] = *v;
  } else {
    j[key] = nullptr;
  }
}

std::optional<double> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

}  // namespace

std::string metric_report_to_json(const MetricReport& r) {
  json j;
  j["utt_id"] = r.utt_id;
  j["mode"] = r.mode;
  j["snr_condition_db"] = r.snr_condition_db;
  put_opt(j, "stoi", r.stoi);
  put_opt(j, "secs", r.secs);
  put_opt(j, "cer", r.cer);
  put_opt(j, "lsd", r.lsd);
  j["alignment_lag"] = r.alignment_lag;
  j["ref_utt_id"] = r.ref_utt_id;
  put_opt(j, "mos", r.mos);
  if (r.transcript) {
    j["transcript"] = *r.transcript;
  } else {
    j["transcript"] = nullptr;
  }
  return j.dump();
}

MetricReport metric_report_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(std::string("bad report line: ") + e.what());
  }
  MetricReport r;
  r.utt_id = j.value("utt_id", "");
  r.mode = j.value("mode", "");
  r.snr_condition_db = j.value("snr_condition_db", 0.0);
  r.stoi = get_opt(j, "stoi");
  r.secs = get_opt(j, "secs");
  r.cer = get_opt(j, "cer");
  r.lsd = get_opt(j, "lsd");
  r.alignment_lag = j.value("alignment_lag", int64_t{0});
  r.ref_utt_id = j.value("ref_utt_id", "");
  r.mos = get_opt(j, "mos");
  if (j.contains("transcript") && !j["transcript"].is_null()) {
    r.transcript = j["transcript"].get<std::string>();
  }
  return r;
}

}  // namespace revoice::metrics
