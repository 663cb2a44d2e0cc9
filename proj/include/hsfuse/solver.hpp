#pragma once

#include <vector>

#include "hsfuse/operator.hpp"
#include "hsfuse/transforms.hpp"

namespace hsfuse {

/// Both arms of the acquisition model acting on the same full cube.
struct DualArmSystem {
  CassiOperator hs;
  CassiOperator ms;
};

struct SolverConfig {
  double alpha = 0.0;     // step scale; <= 0 requests the power-iteration bound
  double rho = 0.1;       // penalty parameter
  double lambda1 = 1.0;   // MS data-term weight
  double lambda2 = 1e-3;  // l1 regularization weight
  int max_iters = 500;
  double tol = 1e-6;      // relative iterate-change stopping threshold
};

struct FusionState {
  SpectralCube f;
  FeatureCube b;  // auxiliary (transform-domain) variable
  FeatureCube d;  // scaled Lagrange multiplier
  double objective = 0.0;
};

/// 1/2 ||y_hs - H_hs f||^2 + (lambda1/2) ||y_ms - H_ms f||^2
/// + lambda2 ||Psi f||_1.
double objective(const SpectralCube& f, const ShotStack& y_hs, const ShotStack& y_ms,
                 const DualArmSystem& ops, const DctTransform& psi,
                 const SolverConfig& cfg);

/// Linearized target update:
/// f - (1/alpha) [H_hs^T (H_hs f - y_hs) + lambda1 H_ms^T (H_ms f - y_ms)
///                + rho Psi^T (Psi f - b + d)].
SpectralCube gradient_step(const SpectralCube& f, const FeatureCube& b,
                           const FeatureCube& d, const ShotStack& y_hs,
                           const ShotStack& y_ms, const DualArmSystem& ops,
                           const DctTransform& psi, const SolverConfig& cfg);

/// One full sweep: linearized f update, soft-threshold b update with
/// lambda2/rho, multiplier update, objective recomputed.
FusionState ladmm_iterate(const FusionState& state, const ShotStack& y_hs,
                          const ShotStack& y_ms, const DualArmSystem& ops,
                          const DctTransform& psi, const SolverConfig& cfg);

/// Adjoint-based starting point, (1/2) H_ms^T y_ms + (1/2) H_hs^T y_hs.
SpectralCube init_f0(const ShotStack& y_hs, const ShotStack& y_ms,
                     const DualArmSystem& ops);

/// Runs from init_f0 / b=0 / d=0 until max_iters or the relative iterate
/// change drops below tol. Throws on a non-finite iterate (step scale too
/// small). Optionally records the per-iteration objective.
SpectralCube ladmm_solve(const ShotStack& y_hs, const ShotStack& y_ms,
                         const DualArmSystem& ops, const SolverConfig& cfg,
                         std::vector<double>* objective_trace = nullptr);

/// Power-iteration estimate of ||H_hs^T H_hs + lambda1 H_ms^T H_ms|| plus
/// rho (the orthonormal Psi contributes exactly rho): a valid step scale
/// for the linearized update.
double estimate_step_scale(const DualArmSystem& ops, double lambda1, double rho,
                           int power_iters = 20);

}  // namespace hsfuse
