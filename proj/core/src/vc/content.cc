// core/src/vc/content.cc
#include "revoice/vc/content.h"

#include <cmath>

#include "revoice/base/error.h"

namespace revoice::vc {

VectorQuantizer::VectorQuantizer(nn::ParamStore* store, int codebook_size, int dim)
    : store_(store), codebook_size_(codebook_size), dim_(dim) {}

void VectorQuantizer::create_buffers(nn::ParamStore& store, int codebook_size, int dim,
                                     Rng& rng) {
  if (codebook_size < 2) throw ModelError("vq: codebook size must be >= 2");
  nn::Param& cb = store.create("vq.codebook", codebook_size, dim, /*trainable=*/false);
  nn::init_normal(cb, 0.5, rng);
  nn::Param& ema = store.create("vq.cluster_ema", codebook_size, 1, false);
  ema.value.setOnes();
  store.create("vq.embed_ema", codebook_size, dim, false).value = cb.value;
  store.create("vq.usage", codebook_size, 1, false);
}

void VectorQuantizer::attach(nn::ParamStore* store) {
  store_ = store;
  codebook_size_ = static_cast<int>(store->get("vq.codebook").value.rows());
  dim_ = static_cast<int>(store->get("vq.codebook").value.cols());
}

const Eigen::MatrixXd& VectorQuantizer::codebook() const {
  return store_->get("vq.codebook").value;
}

Eigen::VectorXd VectorQuantizer::usage_counts() const {
  return store_->get("vq.usage").value.col(0);
}

std::vector<int> VectorQuantizer::assign(const Eigen::MatrixXd& features) const {
  const Eigen::MatrixXd& cb = codebook();
  if (features.cols() != cb.cols()) throw ModelError("vq: feature dim mismatch");
  const Eigen::VectorXd cb_sq = cb.rowwise().squaredNorm();
  std::vector<int> ids(static_cast<size_t>(features.rows()));
  for (int64_t i = 0; i < features.rows(); ++i) {
    // ||f - c||^2 = ||c||^2 - 2 f.c + const
    Eigen::VectorXd d = cb_sq - 2.0 * (cb * features.row(i).transpose());
    int best = 0;
    d.minCoeff(&best);
    ids[static_cast<size_t>(i)] = best;
  }
  return ids;
}

Eigen::MatrixXd VectorQuantizer::codewords(const std::vector<int>& ids) const {
  const Eigen::MatrixXd& cb = codebook();
  Eigen::MatrixXd out(static_cast<int64_t>(ids.size()), cb.cols());
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= codebook_size_) throw ModelError("vq: index out of range");
    out.row(static_cast<int64_t>(i)) = cb.row(ids[i]);
  }
  return out;
}

void VectorQuantizer::ema_update(const Eigen::MatrixXd& features, const std::vector<int>& ids,
                                 Rng& rng) {
  nn::Param& cb = store_->get("vq.codebook");
  nn::Param& cluster = store_->get("vq.cluster_ema");
  nn::Param& embed = store_->get("vq.embed_ema");
  nn::Param& usage = store_->get("vq.usage");

  Eigen::VectorXd counts = Eigen::VectorXd::Zero(codebook_size_);
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(codebook_size_, dim_);
  for (size_t i = 0; i < ids.size(); ++i) {
    counts(ids[i]) += 1.0;
    sums.row(ids[i]) += features.row(static_cast<int64_t>(i));
    usage.value(ids[i], 0) += 1.0;
  }

  cluster.value.col(0) = decay_ * cluster.value.col(0) + (1.0 - decay_) * counts;
  embed.value = decay_ * embed.value + (1.0 - decay_) * sums;

  // Laplace-smoothed normalization
  const double total = cluster.value.col(0).sum();
  for (int k = 0; k < codebook_size_; ++k) {
    const double n = (cluster.value(k, 0) + eps_) /
                     (total + codebook_size_ * eps_) * total;
    cb.value.row(k) = embed.value.row(k) / n;
  }

  // Reseed codes that have effectively died to keep the book populated.
  if (features.rows() > 0) {
    for (int k = 0; k < codebook_size_; ++k) {
      if (cluster.value(k, 0) < 0.03) {
        const int64_t r = static_cast<int64_t>(rng.uniform_int(static_cast<uint64_t>(features.rows())));
        cb.value.row(k) = features.row(r);
        embed.value.row(k) = features.row(r);
        cluster.value(k, 0) = 1.0;
      }
    }
  }
}

double VectorQuantizer::perplexity(const std::vector<int>& ids) const {
  if (ids.empty()) return 0.0;
  Eigen::VectorXd hist = Eigen::VectorXd::Zero(codebook_size_);
  for (int id : ids) hist(id) += 1.0;
  hist /= static_cast<double>(ids.size());
  double entropy = 0.0;
  for (int k = 0; k < codebook_size_; ++k) {
    if (hist(k) > 0.0) entropy -= hist(k) * std::log(hist(k));
  }
  return std::exp(entropy);
}

}  // namespace revoice::vc
