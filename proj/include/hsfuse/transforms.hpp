#pragma once

#include "hsfuse/cube.hpp"

namespace hsfuse {

/// Elementwise sign(x) * max(|x| - lam, 0), the proximal operator of
/// lam * ||.||_1. Throws for negative lam.
Eigen::ArrayXd soft_threshold(const Eigen::ArrayXd& x, double lam);

/// Unchecked kernel used inside the unrolled network, where the threshold
/// is a free learnable scalar.
inline Eigen::ArrayXd soft_threshold_unchecked(const Eigen::ArrayXd& x, double lam) {
  return x.sign() * (x.abs() - lam).max(0.0);
}

/// Abstract sparsifying transform pair acting on flat band-major volumes.
/// forward() maps image domain -> transform domain, inverse() maps back.
class SparsifyingTransform {
 public:
  virtual ~SparsifyingTransform() = default;
  virtual Eigen::ArrayXd forward(const Eigen::ArrayXd& x) const = 0;
  virtual Eigen::ArrayXd inverse(const Eigen::ArrayXd& c) const = 0;
};

/// Separable orthonormal 3D DCT-II: 2D DCT per band composed with a 1D
/// DCT across bands. inverse() is the exact transpose, so round trips are
/// exact to rounding and Parseval holds.
class DctTransform : public SparsifyingTransform {
 public:
  DctTransform(int rows, int cols, int bands);

  Eigen::ArrayXd forward(const Eigen::ArrayXd& x) const override;
  Eigen::ArrayXd inverse(const Eigen::ArrayXd& c) const override;

  FeatureCube transform(const SpectralCube& cube) const;
  SpectralCube inverse_transform(const FeatureCube& coeffs) const;

 private:
  int rows_, cols_, bands_;
  Eigen::MatrixXd cm_, cn_, cl_;  // orthonormal DCT-II bases
};

/// Orthonormal DCT-II matrix of size n.
Eigen::MatrixXd dct_matrix(int n);

}  // namespace hsfuse
