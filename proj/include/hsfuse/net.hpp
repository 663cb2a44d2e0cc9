#pragma once

#include <string>
#include <vector>

#include "hsfuse/conv.hpp"
#include "hsfuse/operator.hpp"
#include "hsfuse/solver.hpp"

namespace hsfuse {

/// Learnable state of one unrolled layer: four scalars plus independent
/// forward/inverse conv transforms.
struct LayerParams {
  double alpha = 0.5;
  double rho = 0.1;
  double lambda1 = 1.0;
  double soft_lambda = 0.01;
  ConvTransformParams nft;
  ConvTransformParams nit;
};

struct LadmmNetParams {
  int rows = 0;
  int cols = 0;
  int bands = 0;
  int feature_maps = 0;
  std::vector<LayerParams> layers;

  int depth() const { return static_cast<int>(layers.size()); }

  /// 4 scalars + 36*F*L kernel weights per layer.
  Eigen::Index param_count() const {
    Eigen::Index n = 0;
    for (const auto& layer : layers)
      n += 4 + layer.nft.param_count() + layer.nit.param_count();
    return n;
  }
};

/// Measurements seen by the approximation unit. The primary operator has
/// fixed unit weight; the optional secondary operator is weighted by the
/// layer's lambda1 (the single-operator compressive-sensing variant
/// leaves it null).
struct MeasurementSet {
  const LinearOperator* primary = nullptr;
  const LinearOperator* secondary = nullptr;
  Eigen::ArrayXd y_primary;
  Eigen::ArrayXd y_secondary;
};

/// Scalar init (0.5, 0.1, 1.0, 0.01) on every layer, Xavier kernels,
/// deterministic per seed.
LadmmNetParams init_params(int rows, int cols, int bands, int feature_maps,
                           int depth, std::uint64_t seed);

Eigen::ArrayXd net_init_f0(const MeasurementSet& meas);

/// f_prev - (1/alpha) [ A1^T(A1 f_prev - y1) + lambda1 A2^T(A2 f_prev - y2)
///                      + rho r_prev ].
Eigen::ArrayXd au_forward(const Eigen::ArrayXd& f_prev, const Eigen::ArrayXd& r_prev,
                          const MeasurementSet& meas, const LayerParams& layer);

struct NruOutputs {
  Eigen::ArrayXd b;
  Eigen::ArrayXd d;
  Eigen::ArrayXd r;
};

/// b = S(G(f)+d_prev), d = d_prev + G(f) - b, r = Ginv(G(f) + d - b),
/// with the transform pair supplied explicitly (conv pair in the learned
/// network, DCT pair in the classical-consistency configuration).
NruOutputs nru_forward(const Eigen::ArrayXd& f_k, const Eigen::ArrayXd& d_prev,
                       double soft_lambda, const SparsifyingTransform& transform);

struct NetTrace {
  std::vector<Eigen::ArrayXd> f;   // f^(k), k = 1..K
  std::vector<Eigen::ArrayXd> gf;  // G^(k)(f^(k))
};

/// Full unrolled forward pass from f0 = net_init_f0 with d0 = r0 = 0.
/// When `fixed_transform` is non-null it replaces every layer's conv pair
/// (used to check consistency with the classical iteration).
Eigen::ArrayXd net_forward(const LadmmNetParams& params, const MeasurementSet& meas,
                           NetTrace* trace = nullptr,
                           const SparsifyingTransform* fixed_transform = nullptr);

// Cube-level wrappers for the dual-arm fusion configuration.
MeasurementSet fusion_measurements(const DualArmSystem& ops, const ShotStack& y_hs,
                                   const ShotStack& y_ms);
SpectralCube net_fuse(const LadmmNetParams& params, const DualArmSystem& ops,
                      const ShotStack& y_hs, const ShotStack& y_ms);

// Versioned checkpoint: JSON header (dims, K, F) + raw little-endian f64
// scalars and kernels. Round trips are bit-exact.
void save_checkpoint(const LadmmNetParams& params, const std::string& path);
LadmmNetParams load_checkpoint(const std::string& path);

}  // namespace hsfuse
