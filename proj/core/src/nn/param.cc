// core/src/nn/param.cc
#include "revoice/nn/param.h"

#include <cmath>

#include "revoice/base/error.h"

namespace revoice::nn {

Param& ParamStore::create(const std::string& name, int64_t rows, int64_t cols, bool trainable) {
  if (index_.count(name)) throw ModelError("duplicate parameter name: " + name);
  auto p = std::make_unique<Param>();
  p->name = name;
  p->value = Mat::Zero(rows, cols);
  p->grad = Mat::Zero(rows, cols);
  p->m = Mat::Zero(rows, cols);
  p->v = Mat::Zero(rows, cols);
  p->trainable = trainable;
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return *params_.back();
}

Param& ParamStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ModelError("unknown parameter: " + name);
  return *params_[it->second];
}

const Param& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ModelError("unknown parameter: " + name);
  return *params_[it->second];
}

bool ParamStore::has(const std::string& name) const { return index_.count(name) > 0; }

std::vector<Param*> ParamStore::all() {
  std::vector<Param*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Param*> ParamStore::all() const {
  std::vector<const Param*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<Param*> ParamStore::trainable() {
  std::vector<Param*> out;
  for (auto& p : params_) {
    if (p->trainable) out.push_back(p.get());
  }
  return out;
}

std::vector<Param*> ParamStore::with_prefix(const std::string& prefix) {
  std::vector<Param*> out;
  for (auto& p : params_) {
    if (p->name.rfind(prefix, 0) == 0) out.push_back(p.get());
  }
  return out;
}

int64_t ParamStore::parameter_count(bool trainable_only) const {
  int64_t n = 0;
  for (const auto& p : params_) {
    if (!trainable_only || p->trainable) n += p->value.size();
  }
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

void init_normal(Param& p, double stddev, Rng& rng) {
  for (int64_t j = 0; j < p.value.cols(); ++j) {
    for (int64_t i = 0; i < p.value.rows(); ++i) {
      p.value(i, j) = stddev * rng.normal();
    }
  }
}

void init_uniform(Param& p, double limit, Rng& rng) {
  for (int64_t j = 0; j < p.value.cols(); ++j) {
    for (int64_t i = 0; i < p.value.rows(); ++i) {
      p.value(i, j) = limit * (2.0 * rng.uniform() - 1.0);
    }
  }
}

void init_fan_in(Param& p, int64_t fan_in, Rng& rng) {
  init_normal(p, std::sqrt(2.0 / static_cast<double>(fan_in)), rng);
}

}  // namespace revoice::nn
