#include "hsfuse/solver.hpp"

#include <cmath>

#include "hsfuse/rng.hpp"

namespace hsfuse {

namespace {

double effective_alpha(const DualArmSystem& ops, const SolverConfig& cfg) {
  return cfg.alpha > 0.0 ? cfg.alpha
                         : estimate_step_scale(ops, cfg.lambda1, cfg.rho);
}

// H_hs^T (H_hs f - y_hs) + lambda1 H_ms^T (H_ms f - y_ms), flat.
Eigen::ArrayXd data_gradient(const Eigen::ArrayXd& f, const ShotStack& y_hs,
                             const ShotStack& y_ms, const DualArmSystem& ops,
                             double lambda1) {
  Eigen::ArrayXd g = ops.hs.adjoint(ops.hs.forward(f) - y_hs.data);
  g += lambda1 * ops.ms.adjoint(ops.ms.forward(f) - y_ms.data);
  return g;
}

}  // namespace

double objective(const SpectralCube& f, const ShotStack& y_hs, const ShotStack& y_ms,
                 const DualArmSystem& ops, const DctTransform& psi,
                 const SolverConfig& cfg) {
  const Eigen::ArrayXd rhs = ops.hs.forward(f.data) - y_hs.data;
  const Eigen::ArrayXd rms = ops.ms.forward(f.data) - y_ms.data;
  return 0.5 * rhs.square().sum() + 0.5 * cfg.lambda1 * rms.square().sum() +
         cfg.lambda2 * psi.forward(f.data).abs().sum();
}

SpectralCube gradient_step(const SpectralCube& f, const FeatureCube& b,
                           const FeatureCube& d, const ShotStack& y_hs,
                           const ShotStack& y_ms, const DualArmSystem& ops,
                           const DctTransform& psi, const SolverConfig& cfg) {
  const double alpha = effective_alpha(ops, cfg);
  Eigen::ArrayXd grad = data_gradient(f.data, y_hs, y_ms, ops, cfg.lambda1);
  grad += cfg.rho * psi.inverse(psi.forward(f.data) - b.data + d.data);
  SpectralCube out = f;
  out.data -= grad / alpha;
  return out;
}

FusionState ladmm_iterate(const FusionState& state, const ShotStack& y_hs,
                          const ShotStack& y_ms, const DualArmSystem& ops,
                          const DctTransform& psi, const SolverConfig& cfg) {
  require(cfg.rho > 0.0, "penalty parameter must be positive");
  FusionState next;
  next.f = gradient_step(state.f, state.b, state.d, y_hs, y_ms, ops, psi, cfg);
  const Eigen::ArrayXd coeffs = psi.forward(next.f.data);
  next.b = state.b;
  next.b.data = soft_threshold(coeffs + state.d.data, cfg.lambda2 / cfg.rho);
  next.d = state.d;
  next.d.data = state.d.data + coeffs - next.b.data;
  next.objective = objective(next.f, y_hs, y_ms, ops, psi, cfg);
  return next;
}

SpectralCube init_f0(const ShotStack& y_hs, const ShotStack& y_ms,
                     const DualArmSystem& ops) {
  SpectralCube f0(ops.hs.full_rows(), ops.hs.full_cols(), ops.hs.full_bands());
  f0.data = 0.5 * hs_adjoint(y_hs, ops.hs).data + 0.5 * ms_adjoint(y_ms, ops.ms).data;
  return f0;
}

SpectralCube ladmm_solve(const ShotStack& y_hs, const ShotStack& y_ms,
                         const DualArmSystem& ops, const SolverConfig& cfg,
                         std::vector<double>* objective_trace) {
  require(cfg.max_iters >= 1, "max_iters must be at least 1");
  const DctTransform psi(ops.hs.full_rows(), ops.hs.full_cols(), ops.hs.full_bands());
  SolverConfig run = cfg;
  run.alpha = effective_alpha(ops, cfg);

  FusionState state;
  state.f = init_f0(y_hs, y_ms, ops);
  state.b = FeatureCube(state.f.rows, state.f.cols, state.f.bands);
  state.d = FeatureCube(state.f.rows, state.f.cols, state.f.bands);
  state.objective = objective(state.f, y_hs, y_ms, ops, psi, run);

  for (int it = 0; it < run.max_iters; ++it) {
    FusionState next = ladmm_iterate(state, y_hs, y_ms, ops, psi, run);
    if (!next.f.data.allFinite())
      throw std::runtime_error("solver diverged: non-finite iterate (step scale too small)");
    if (objective_trace) objective_trace->push_back(next.objective);
    const double denom = std::sqrt(state.f.data.square().sum());
    const double change = std::sqrt((next.f.data - state.f.data).square().sum());
    state = std::move(next);
    if (denom > 0.0 && change / denom < run.tol) break;
  }
  return state.f;
}

double estimate_step_scale(const DualArmSystem& ops, double lambda1, double rho,
                           int power_iters) {
  Rng rng(0x9e3779b97f4a7c15ULL);
  Eigen::ArrayXd v(ops.hs.domain_size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  v /= std::sqrt(v.square().sum());
  double eig = 0.0;
  for (int it = 0; it < power_iters; ++it) {
    Eigen::ArrayXd w = ops.hs.adjoint(ops.hs.forward(v)) +
                       lambda1 * ops.ms.adjoint(ops.ms.forward(v));
    eig = std::sqrt(w.square().sum());
    if (eig == 0.0) break;
    v = w / eig;
  }
  return eig + rho;
}

}  // namespace hsfuse
