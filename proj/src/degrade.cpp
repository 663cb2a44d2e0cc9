#include "hsfuse/degrade.hpp"

namespace hsfuse {

SpectralCube spatial_decimate(const SpectralCube& cube, int p) {
  require(p >= 1, "decimation factor must be positive");
  require(cube.rows % p == 0 && cube.cols % p == 0,
          "spatial decimation factor does not divide image dimensions");
  if (p == 1) return cube;
  const int mh = cube.rows / p, nh = cube.cols / p;
  SpectralCube out(mh, nh, cube.bands);
  const double inv = 1.0 / (static_cast<double>(p) * p);
  for (int l = 0; l < cube.bands; ++l) {
    auto src = cube.band(l);
    auto dst = out.band(l);
    for (int j = 0; j < nh; ++j)
      for (int i = 0; i < mh; ++i)
        dst(i, j) = inv * src.block(i * p, j * p, p, p).sum();
  }
  return out;
}

SpectralCube spatial_decimate_adjoint(const SpectralCube& low, int p) {
  require(p >= 1, "decimation factor must be positive");
  if (p == 1) return low;
  SpectralCube out(low.rows * p, low.cols * p, low.bands);
  const double inv = 1.0 / (static_cast<double>(p) * p);
  for (int l = 0; l < low.bands; ++l) {
    auto src = low.band(l);
    auto dst = out.band(l);
    for (int j = 0; j < low.cols; ++j)
      for (int i = 0; i < low.rows; ++i)
        dst.block(i * p, j * p, p, p).setConstant(inv * src(i, j));
  }
  return out;
}

SpectralCube spectral_decimate(const SpectralCube& cube, int q) {
  require(q >= 1, "decimation factor must be positive");
  require(cube.bands % q == 0,
          "spectral decimation factor does not divide band count");
  if (q == 1) return cube;
  const int lms = cube.bands / q;
  SpectralCube out(cube.rows, cube.cols, lms);
  const double inv = 1.0 / q;
  for (int l = 0; l < lms; ++l) {
    auto dst = out.band(l);
    dst.setZero();
    for (int z = 0; z < q; ++z) dst += cube.band(l * q + z);
    dst *= inv;
  }
  return out;
}

SpectralCube spectral_decimate_adjoint(const SpectralCube& low, int q) {
  require(q >= 1, "decimation factor must be positive");
  if (q == 1) return low;
  SpectralCube out(low.rows, low.cols, low.bands * q);
  const double inv = 1.0 / q;
  for (int l = 0; l < low.bands; ++l) {
    auto src = low.band(l);
    for (int z = 0; z < q; ++z) out.band(l * q + z) = inv * src;
  }
  return out;
}

std::array<GrayImage, 3> rgb_composite(const SpectralCube& cube, int band_r,
                                       int band_g, int band_b) {
  const int sel[3] = {band_r, band_g, band_b};
  std::array<GrayImage, 3> out;
  for (int c = 0; c < 3; ++c) {
    require(sel[c] >= 0 && sel[c] < cube.bands, "composite band index out of range");
    auto src = cube.band(sel[c]);
    GrayImage img(cube.rows, cube.cols);
    const double lo = src.minCoeff(), hi = src.maxCoeff();
    if (hi > lo)
      img.mat() = (src.array() - lo) / (hi - lo);
    else
      img.mat().setZero();
    out[c] = std::move(img);
  }
  return out;
}

}  // namespace hsfuse
