#pragma once

#include <string>
#include <vector>

#include "hsfuse/net.hpp"

namespace hsfuse {

struct TrainingConfig {
  double learning_rate = 5e-4;
  int epochs = 1;
  int batch_size = 1;
  double gamma = 0.1;  // invertibility-loss weight
  std::uint64_t seed = 0;
  double grad_clip = 0.0;  // global l2 clip; <= 0 disables
};

/// One supervised sample: ground truth and its compressive projections.
struct TrainingSample {
  Eigen::ArrayXd truth;
  Eigen::ArrayXd y_primary;
  Eigen::ArrayXd y_secondary;  // empty when the model has no secondary arm
};

/// Gradient carrier, shape-congruent with the parameter set.
using GradientSet = LadmmNetParams;

GradientSet zero_gradients(const LadmmNetParams& params);

struct LossBreakdown {
  double total = 0.0;
  double data = 0.0;
  double inv = 0.0;
};

/// total = ||f_K - truth||^2 + gamma * (1/K) sum_k ||Ginv_k(G_k(f_k)) - f_k||^2.
/// `activation_pattern`, when non-null, receives a hash of every ReLU and
/// soft-threshold activation decision of the pass (used by the
/// finite-difference checker to detect kink crossings).
LossBreakdown loss(const LadmmNetParams& params, const MeasurementSet& meas,
                   const Eigen::ArrayXd& truth, double gamma,
                   std::uint64_t* activation_pattern = nullptr);

/// Exact reverse-mode gradients of the total loss through the unrolled
/// graph. Subgradient conventions: ReLU'(0) = 0; soft-threshold slope 0
/// inside the dead zone and at |x| = lambda; dS/dlambda = -sign(x)
/// outside the dead zone.
GradientSet backward(const LadmmNetParams& params, const MeasurementSet& meas,
                     const Eigen::ArrayXd& truth, double gamma,
                     LossBreakdown* loss_out = nullptr);

struct FiniteDiffGroup {
  std::string name;
  double max_rel_err = 0.0;
  int checked = 0;
  int skipped = 0;
  bool pass = true;
};

struct FiniteDiffReport {
  std::vector<FiniteDiffGroup> groups;
  bool pass = true;
};

/// Central differences against backward(), per parameter group.
/// Parameters whose perturbation flips an activation decision (within
/// 10 * step of a kink) are skipped.
FiniteDiffReport finite_diff_check(const LadmmNetParams& params,
                                   const MeasurementSet& meas,
                                   const Eigen::ArrayXd& truth, double gamma,
                                   double step, double tol);

struct AdamState {
  GradientSet m;
  GradientSet v;
};

AdamState make_adam_state(const LadmmNetParams& params);

/// Standard Adam (beta1 = 0.9, beta2 = 0.999, eps = 1e-8) with bias
/// correction; t is the 1-based step count.
void adam_step(LadmmNetParams& params, const GradientSet& grads, AdamState& moments,
               int t, double learning_rate);

struct EpochStats {
  double data_loss = 0.0;
  double inv_loss = 0.0;
  double total_loss = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  bool diverged = false;
};

/// Epoch loop over the samples with deterministic per-seed shuffling and
/// per-batch Adam updates. A non-finite loss aborts, restoring the
/// parameters from the start of the failing epoch.
TrainResult train(LadmmNetParams& params, const LinearOperator* primary,
                  const LinearOperator* secondary,
                  const std::vector<TrainingSample>& samples,
                  const TrainingConfig& cfg);

}  // namespace hsfuse
