// core/include/revoice/vc/diffusion.h
#ifndef REVOICE_VC_DIFFUSION_H_
#define REVOICE_VC_DIFFUSION_H_

#include <Eigen/Core>
#include <functional>

#include "revoice/base/rng.h"

namespace revoice::vc {

using Mat = Eigen::MatrixXd;

// Linear noise schedule beta(t) = beta0 + (beta1 - beta0) * t on t in (0, 1],
// with a data-dependent terminal prior centered at the coarse spectrogram.
struct DiffusionSchedule {
  double beta0 = 0.05;
  double beta1 = 20.0;
  double t_min = 1e-4;

  double beta(double t) const { return beta0 + (beta1 - beta0) * t; }
  // B(t) = integral of beta: beta0*t + (beta1-beta0)*t^2/2
  double integral(double t) const { return beta0 * t + 0.5 * (beta1 - beta0) * t * t; }
  // coefficient of (M0 - Mhat) in the forward marginal mean
  double mean_coeff(double t) const { return std::exp(-0.5 * integral(t)); }
  // marginal standard deviation sqrt(1 - exp(-B(t)))
  double sigma(double t) const { return std::sqrt(1.0 - std::exp(-integral(t))); }

  void check() const;
};

struct ForwardSample {
  Mat mt;    // diffused state
  Mat eps;   // the exact standard-normal draw used
  double t;
};

// Mt = Mhat + (M0 - Mhat) * exp(-B(t)/2) + sqrt(1 - exp(-B(t))) * eps.
// t must lie in (0, 1].
ForwardSample forward_diffuse(const Mat& m0, const Mat& mhat, double t,
                              const DiffusionSchedule& sched, Rng& rng);

// Same marginal with a caller-supplied eps (for oracle tests and in-graph use).
Mat forward_marginal(const Mat& m0, const Mat& mhat, double t,
                     const DiffusionSchedule& sched, const Mat& eps);

// One-draw objective || predictor(Mt, t) + eps ||^2 with an arbitrary
// noise-scale predictor. The trained-model loss wraps this with the score
// network; tests plug in closed-form oracles.
double diffusion_loss_with_predictor(
    const Mat& m0, const Mat& mhat, double t, const Mat& eps,
    const DiffusionSchedule& sched,
    const std::function<Mat(const Mat& mt, double t)>& predictor);

// Noise-scale prediction for state x at time t: the blended output
// (1+w)*cond - w*uncond is supplied by the caller as one callback.
using ScoreFn = std::function<Mat(const Mat& x, double t)>;

// First-order reverse-SDE integration from t=1 down to t_min, initialized at
// Mhat + unit Gaussian noise. The predictor output is converted to a score by
// dividing by sigma(t). Deterministic given the rng. Throws ModelError with
// the step index if the state stops being finite.
Mat reverse_sde_sample(const ScoreFn& score, const Mat& mhat,
                       const DiffusionSchedule& sched, int steps, Rng& rng);

}  // namespace revoice::vc

#endif  // REVOICE_VC_DIFFUSION_H_
