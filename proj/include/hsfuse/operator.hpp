#pragma once

#include <cstdint>

#include "hsfuse/aperture.hpp"
#include "hsfuse/cube.hpp"

namespace hsfuse {

/// Detector measurements of a multi-snapshot acquisition. Storage matches
/// the vectorization u = i + j*rows + w*rows*cols.
struct ShotStack {
  int rows = 0;
  int cols = 0;
  int shots = 0;
  Eigen::ArrayXd data;

  ShotStack() = default;
  ShotStack(int m, int n, int w)
      : rows(m), cols(n), shots(w),
        data(Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(m) * n * w)) {}

  Eigen::Map<Eigen::MatrixXd> shot(int w) {
    return {data.data() + static_cast<Eigen::Index>(w) * rows * cols, rows, cols};
  }
  Eigen::Map<const Eigen::MatrixXd> shot(int w) const {
    return {data.data() + static_cast<Eigen::Index>(w) * rows * cols, rows, cols};
  }
};

/// Matrix-free linear map between flat vectors with a matched adjoint.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual Eigen::Index domain_size() const = 0;
  virtual Eigen::Index range_size() const = 0;
  virtual Eigen::ArrayXd forward(const Eigen::ArrayXd& x) const = 0;
  virtual Eigen::ArrayXd adjoint(const Eigen::ArrayXd& y) const = 0;
};

enum class Arm { HS, MS };

/// Structured measurement operator of one 3D-CASSI arm acting on a full
/// M x N x L cube. The HS arm composes p x p spatial block averaging with
/// the coding (matrix entries carry 1/p^2); the MS arm composes q-band
/// spectral averaging with the coding (entries carry 1/q). Never
/// materialized densely outside the test oracle.
class CassiOperator : public LinearOperator {
 public:
  CassiOperator(Arm arm, CodedApertureStack apertures, int p, int q, int full_rows,
                int full_cols, int full_bands);

  Arm arm() const { return arm_; }
  int p() const { return p_; }
  int q() const { return q_; }
  int full_rows() const { return rows_; }
  int full_cols() const { return cols_; }
  int full_bands() const { return bands_; }
  const CodedApertureStack& apertures() const { return apertures_; }

  ShotStack apply(const SpectralCube& cube) const;
  SpectralCube apply_adjoint(const ShotStack& shots) const;

  Eigen::Index domain_size() const override {
    return static_cast<Eigen::Index>(rows_) * cols_ * bands_;
  }
  Eigen::Index range_size() const override;
  Eigen::ArrayXd forward(const Eigen::ArrayXd& x) const override;
  Eigen::ArrayXd adjoint(const Eigen::ArrayXd& y) const override;

 private:
  Arm arm_;
  CodedApertureStack apertures_;
  int p_;
  int q_;
  int rows_;
  int cols_;
  int bands_;
};

ShotStack hs_forward(const SpectralCube& cube, const CassiOperator& op);
ShotStack ms_forward(const SpectralCube& cube, const CassiOperator& op);
SpectralCube hs_adjoint(const ShotStack& shots, const CassiOperator& op);
SpectralCube ms_adjoint(const ShotStack& shots, const CassiOperator& op);

/// Additive iid Gaussian detector noise scaled so the empirical SNR of
/// the result is snr_db; an infinite snr returns the input unchanged.
ShotStack add_noise(const ShotStack& shots, double snr_db, std::uint64_t seed);

}  // namespace hsfuse
