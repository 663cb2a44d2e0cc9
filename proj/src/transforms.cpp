#include "hsfuse/transforms.hpp"

#include <cmath>

namespace hsfuse {

Eigen::ArrayXd soft_threshold(const Eigen::ArrayXd& x, double lam) {
  require(lam >= 0.0, "soft-threshold parameter must be nonnegative");
  return soft_threshold_unchecked(x, lam);
}

Eigen::MatrixXd dct_matrix(int n) {
  Eigen::MatrixXd c(n, n);
  const double scale0 = std::sqrt(1.0 / n);
  const double scale = std::sqrt(2.0 / n);
  for (int k = 0; k < n; ++k)
    for (int t = 0; t < n; ++t)
      c(k, t) = (k == 0 ? scale0 : scale) * std::cos(M_PI * (t + 0.5) * k / n);
  return c;
}

DctTransform::DctTransform(int rows, int cols, int bands)
    : rows_(rows), cols_(cols), bands_(bands), cm_(dct_matrix(rows)),
      cn_(dct_matrix(cols)), cl_(dct_matrix(bands)) {}

Eigen::ArrayXd DctTransform::forward(const Eigen::ArrayXd& x) const {
  require(x.size() == static_cast<Eigen::Index>(rows_) * cols_ * bands_,
          "DCT input size mismatch");
  Eigen::ArrayXd out(x.size());
  const Eigen::Index plane = static_cast<Eigen::Index>(rows_) * cols_;
  for (int l = 0; l < bands_; ++l) {
    Eigen::Map<const Eigen::MatrixXd> src(x.data() + l * plane, rows_, cols_);
    Eigen::Map<Eigen::MatrixXd> dst(out.data() + l * plane, rows_, cols_);
    dst = cm_ * src * cn_.transpose();
  }
  Eigen::Map<Eigen::MatrixXd> pix(out.data(), plane, bands_);
  pix = (pix * cl_.transpose()).eval();
  return out;
}

Eigen::ArrayXd DctTransform::inverse(const Eigen::ArrayXd& c) const {
  require(c.size() == static_cast<Eigen::Index>(rows_) * cols_ * bands_,
          "DCT input size mismatch");
  Eigen::ArrayXd out = c;
  const Eigen::Index plane = static_cast<Eigen::Index>(rows_) * cols_;
  Eigen::Map<Eigen::MatrixXd> pix(out.data(), plane, bands_);
  pix = (pix * cl_).eval();
  for (int l = 0; l < bands_; ++l) {
    Eigen::Map<Eigen::MatrixXd> plane_map(out.data() + l * plane, rows_, cols_);
    plane_map = (cm_.transpose() * plane_map * cn_).eval();
  }
  return out;
}

FeatureCube DctTransform::transform(const SpectralCube& cube) const {
  FeatureCube out(rows_, cols_, bands_);
  out.data = forward(cube.data);
  return out;
}

SpectralCube DctTransform::inverse_transform(const FeatureCube& coeffs) const {
  SpectralCube out(rows_, cols_, bands_);
  out.data = inverse(coeffs.data);
  return out;
}

}  // namespace hsfuse
