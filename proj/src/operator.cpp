#include "hsfuse/operator.hpp"

#include <cmath>
#include <limits>

#include "hsfuse/degrade.hpp"
#include "hsfuse/rng.hpp"

namespace hsfuse {

CassiOperator::CassiOperator(Arm arm, CodedApertureStack apertures, int p, int q,
                             int full_rows, int full_cols, int full_bands)
    : arm_(arm), apertures_(std::move(apertures)), p_(p), q_(q), rows_(full_rows),
      cols_(full_cols), bands_(full_bands) {
  require(p_ >= 1 && q_ >= 1, "decimation factors must be positive");
  if (arm_ == Arm::HS) {
    require(q_ == 1, "HS arm carries no spectral decimation");
    require(rows_ % p_ == 0 && cols_ % p_ == 0, "p does not divide spatial dims");
    require(apertures_.rows == rows_ / p_ && apertures_.cols == cols_ / p_ &&
                apertures_.bands == bands_,
            "HS aperture dimensions must be (M/p, N/p, L)");
  } else {
    require(p_ == 1, "MS arm carries no spatial decimation");
    require(bands_ % q_ == 0, "q does not divide band count");
    require(apertures_.rows == rows_ && apertures_.cols == cols_ &&
                apertures_.bands == bands_ / q_,
            "MS aperture dimensions must be (M, N, L/q)");
  }
}

Eigen::Index CassiOperator::range_size() const {
  return static_cast<Eigen::Index>(apertures_.rows) * apertures_.cols * apertures_.shots;
}

ShotStack CassiOperator::apply(const SpectralCube& cube) const {
  require(cube.rows == rows_ && cube.cols == cols_ && cube.bands == bands_,
          "cube dimensions disagree with operator");
  const SpectralCube dec =
      arm_ == Arm::HS ? spatial_decimate(cube, p_) : spectral_decimate(cube, q_);
  ShotStack out(apertures_.rows, apertures_.cols, apertures_.shots);
  for (int w = 0; w < apertures_.shots; ++w) {
    auto acc = out.shot(w);
    for (int l = 0; l < apertures_.bands; ++l)
      acc.array() += dec.band(l).array() * apertures_.shot_band(w, l).array();
  }
  return out;
}

SpectralCube CassiOperator::apply_adjoint(const ShotStack& shots) const {
  require(shots.rows == apertures_.rows && shots.cols == apertures_.cols &&
              shots.shots == apertures_.shots,
          "shot dimensions disagree with operator");
  SpectralCube low(apertures_.rows, apertures_.cols, apertures_.bands);
  for (int l = 0; l < apertures_.bands; ++l) {
    auto acc = low.band(l);
    for (int w = 0; w < apertures_.shots; ++w)
      acc.array() += shots.shot(w).array() * apertures_.shot_band(w, l).array();
  }
  return arm_ == Arm::HS ? spatial_decimate_adjoint(low, p_)
                         : spectral_decimate_adjoint(low, q_);
}

Eigen::ArrayXd CassiOperator::forward(const Eigen::ArrayXd& x) const {
  require(x.size() == domain_size(), "flat input size mismatch");
  SpectralCube cube(rows_, cols_, bands_);
  cube.data = x;
  return apply(cube).data;
}

Eigen::ArrayXd CassiOperator::adjoint(const Eigen::ArrayXd& y) const {
  require(y.size() == range_size(), "flat measurement size mismatch");
  ShotStack shots(apertures_.rows, apertures_.cols, apertures_.shots);
  shots.data = y;
  return apply_adjoint(shots).data;
}

ShotStack hs_forward(const SpectralCube& cube, const CassiOperator& op) {
  require(op.arm() == Arm::HS, "operator is not the HS arm");
  return op.apply(cube);
}

ShotStack ms_forward(const SpectralCube& cube, const CassiOperator& op) {
  require(op.arm() == Arm::MS, "operator is not the MS arm");
  return op.apply(cube);
}

SpectralCube hs_adjoint(const ShotStack& shots, const CassiOperator& op) {
  require(op.arm() == Arm::HS, "operator is not the HS arm");
  return op.apply_adjoint(shots);
}

SpectralCube ms_adjoint(const ShotStack& shots, const CassiOperator& op) {
  require(op.arm() == Arm::MS, "operator is not the MS arm");
  return op.apply_adjoint(shots);
}

ShotStack add_noise(const ShotStack& shots, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db)) return shots;
  const double power = shots.data.square().mean();
  require(power > 0.0, "cannot set a finite SNR on an all-zero shot stack");
  const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  Rng rng(seed);
  ShotStack out = shots;
  for (Eigen::Index k = 0; k < out.data.size(); ++k) out.data[k] += sigma * rng.normal();
  return out;
}

}  // namespace hsfuse
