#pragma once

#include "hsfuse/cube.hpp"

namespace hsfuse {

struct MetricReport {
  double psnr_db = 0.0;  // +inf when the cubes are identical
  double ssim = 0.0;
  double sam_rad = 0.0;
};

/// 10 log10(peak^2 / MSE) over all voxels; +inf when MSE = 0.
double psnr(const SpectralCube& ref, const SpectralCube& est, double peak = 1.0);

/// Standard single-scale SSIM: 11x11 Gaussian window (sigma 1.5),
/// C1 = (0.01 peak)^2, C2 = (0.03 peak)^2, mean over fully contained
/// window positions.
double ssim(const GrayImage& ref, const GrayImage& est, double peak = 1.0);

/// Mean over bands of the per-band SSIM.
double ssim(const SpectralCube& ref, const SpectralCube& est, double peak = 1.0);

/// Mean per-pixel spectral angle in radians; pixels with a zero-norm
/// spectrum in either cube are skipped, and all-degenerate input throws.
double sam(const SpectralCube& ref, const SpectralCube& est);

MetricReport evaluate(const SpectralCube& ref, const SpectralCube& est,
                      double peak = 1.0);

}  // namespace hsfuse
