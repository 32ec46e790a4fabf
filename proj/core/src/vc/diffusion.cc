// core/src/vc/diffusion.cc
#include "revoice/vc/diffusion.h"

#include <cmath>
#include <string>

#include "revoice/base/error.h"

namespace revoice::vc {

void DiffusionSchedule::check() const {
  if (!(beta1 > beta0 && beta0 > 0.0)) {
    throw DataError("diffusion schedule: need beta1 > beta0 > 0");
  }
  if (!(t_min > 0.0 && t_min < 1.0)) {
    throw DataError("diffusion schedule: t_min must be in (0, 1)");
  }
}

namespace {

Mat normal_mat(int64_t rows, int64_t cols, Rng& rng) {
  Mat m(rows, cols);
  for (int64_t j = 0; j < cols; ++j) {
    for (int64_t i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

}  // namespace

Mat forward_marginal(const Mat& m0, const Mat& mhat, double t,
                     const DiffusionSchedule& sched, const Mat& eps) {
  if (t <= 0.0 || t > 1.0) {
    throw DataError("forward_diffuse: t must be in (0, 1], got " + std::to_string(t));
  }
  if (m0.rows() != mhat.rows() || m0.cols() != mhat.cols() ||
      m0.rows() != eps.rows() || m0.cols() != eps.cols()) {
    throw DataError("forward_diffuse: shape mismatch");
  }
  const double c = sched.mean_coeff(t);
  return mhat + c * (m0 - mhat) + sched.sigma(t) * eps;
}

ForwardSample forward_diffuse(const Mat& m0, const Mat& mhat, double t,
                              const DiffusionSchedule& sched, Rng& rng) {
  ForwardSample out;
  out.eps = normal_mat(m0.rows(), m0.cols(), rng);
  out.mt = forward_marginal(m0, mhat, t, sched, out.eps);
  out.t = t;
  return out;
}

double diffusion_loss_with_predictor(
    const Mat& m0, const Mat& mhat, double t, const Mat& eps,
    const DiffusionSchedule& sched,
    const std::function<Mat(const Mat& mt, double t)>& predictor) {
  const Mat mt = forward_marginal(m0, mhat, t, sched, eps);
  const Mat residual = predictor(mt, t) + eps;
  return residual.squaredNorm();
}

Mat reverse_sde_sample(const ScoreFn& score, const Mat& mhat,
                       const DiffusionSchedule& sched, int steps, Rng& rng) {
  sched.check();
  if (steps < 1) throw DataError("reverse_sde_sample: steps must be >= 1");

  Mat x = mhat + normal_mat(mhat.rows(), mhat.cols(), rng);
  const double h = (1.0 - sched.t_min) / static_cast<double>(steps);
  for (int k = 0; k < steps; ++k) {
    const double t = 1.0 - h * static_cast<double>(k);
    const double beta = sched.beta(t);
    const double sigma = sched.sigma(t);
    const Mat pred = score(x, t);
    if (pred.rows() != x.rows() || pred.cols() != x.cols()) {
      throw ModelError("reverse_sde_sample: predictor shape mismatch at step " +
                       std::to_string(k));
    }
    // reverse-time Euler-Maruyama; predictor / sigma is the score estimate
    x += h * (0.5 * beta * (x - mhat) + beta * (pred / sigma));
    if (k + 1 < steps) {
      x += std::sqrt(h * beta) * normal_mat(x.rows(), x.cols(), rng);
    }
    if (!x.allFinite()) {
      throw ModelError("reverse_sde_sample: non-finite state at step " + std::to_string(k));
    }
  }
  return x;
}

}  // namespace revoice::vc
