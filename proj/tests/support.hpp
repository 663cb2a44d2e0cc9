#pragma once

// Test-only reference implementations, independent of the library's
// matrix-free code paths: explicit measurement matrices built from the
// per-entry index rules, brute-force convolution, and a scalar-loop SSIM.

#include <Eigen/Dense>

#include "hsfuse/aperture.hpp"
#include "hsfuse/conv.hpp"
#include "hsfuse/cube.hpp"
#include "hsfuse/rng.hpp"

namespace hsfuse::testing {

// Explicit MS measurement matrix: entry (1/q) * B_ms(w,i,j,l) at
// u = i + j*M + w*M*N, v = i + j*M + (l*q + z)*M*N for z = 0..q-1.
inline Eigen::MatrixXd dense_ms_matrix(const CodedApertureStack& ap, int q) {
  const int m = ap.rows, n = ap.cols, lms = ap.bands, w = ap.shots;
  const int full_bands = lms * q;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m) * n * w,
                                            static_cast<Eigen::Index>(m) * n * full_bands);
  for (int ws = 0; ws < w; ++ws)
    for (int l = 0; l < lms; ++l)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i) {
          const double entry = ap(ws, i, j, l) / q;
          if (entry == 0.0) continue;
          const Eigen::Index u = i + static_cast<Eigen::Index>(j) * m +
                                 static_cast<Eigen::Index>(ws) * m * n;
          for (int z = 0; z < q; ++z) {
            const Eigen::Index v = i + static_cast<Eigen::Index>(j) * m +
                                   static_cast<Eigen::Index>(l * q + z) * m * n;
            h(u, v) += entry;
          }
        }
  return h;
}

// Explicit HS measurement matrix: entry (1/p^2) * B_hs(w,i,j,l) at
// u = i + j*Mh + w*Mh*Nh,
// v = i*p + j*p^2*Mh + l*p^2*Mh*Nh + z1 + p*Mh*z2 for z1, z2 = 0..p-1.
inline Eigen::MatrixXd dense_hs_matrix(const CodedApertureStack& ap, int p) {
  const int mh = ap.rows, nh = ap.cols, bands = ap.bands, w = ap.shots;
  const Eigen::Index full = static_cast<Eigen::Index>(mh) * p * nh * p * bands;
  Eigen::MatrixXd h =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(mh) * nh * w, full);
  for (int ws = 0; ws < w; ++ws)
    for (int l = 0; l < bands; ++l)
      for (int j = 0; j < nh; ++j)
        for (int i = 0; i < mh; ++i) {
          const double entry = ap(ws, i, j, l) / (static_cast<double>(p) * p);
          if (entry == 0.0) continue;
          const Eigen::Index u = i + static_cast<Eigen::Index>(j) * mh +
                                 static_cast<Eigen::Index>(ws) * mh * nh;
          for (int z2 = 0; z2 < p; ++z2)
            for (int z1 = 0; z1 < p; ++z1) {
              const Eigen::Index v = static_cast<Eigen::Index>(i) * p +
                                     static_cast<Eigen::Index>(j) * p * p * mh +
                                     static_cast<Eigen::Index>(l) * p * p * mh * nh +
                                     z1 + static_cast<Eigen::Index>(p) * mh * z2;
              h(u, v) += entry;
            }
        }
  return h;
}

// Brute-force zero-padded 3x3 cross-channel convolution.
inline Eigen::ArrayXd naive_conv2d(const Eigen::ArrayXd& in, int rows, int cols,
                                   const ConvKernel& k) {
  const Eigen::Index plane = static_cast<Eigen::Index>(rows) * cols;
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(plane * k.out_ch);
  for (int o = 0; o < k.out_ch; ++o)
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) {
        double acc = 0.0;
        for (int c = 0; c < k.in_ch; ++c)
          for (int a = -1; a <= 1; ++a)
            for (int b = -1; b <= 1; ++b) {
              const int ii = i + a, jj = j + b;
              if (ii < 0 || ii >= rows || jj < 0 || jj >= cols) continue;
              acc += k.at(o, c, a, b) * in[ii + static_cast<Eigen::Index>(jj) * rows +
                                           static_cast<Eigen::Index>(c) * plane];
            }
        out[i + static_cast<Eigen::Index>(j) * rows + static_cast<Eigen::Index>(o) * plane] =
            acc;
      }
  return out;
}

inline Eigen::ArrayXd naive_conv_transform(const ConvTransformParams& params,
                                           const Eigen::ArrayXd& in, int rows,
                                           int cols) {
  Eigen::ArrayXd hidden = naive_conv2d(in, rows, cols, params.kernel1).max(0.0);
  return naive_conv2d(hidden, rows, cols, params.kernel2);
}

inline SpectralCube random_cube(int rows, int cols, int bands, std::uint64_t seed) {
  SpectralCube cube(rows, cols, bands);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < cube.size(); ++i) cube.data[i] = rng.uniform();
  return cube;
}

inline Eigen::ArrayXd random_array(Eigen::Index n, std::uint64_t seed) {
  Eigen::ArrayXd out(n);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = rng.normal();
  return out;
}

// Scalar-loop SSIM with the standard 11x11 Gaussian window.
inline double naive_ssim(const GrayImage& x, const GrayImage& y) {
  const int win = 11;
  const double sigma = 1.5;
  double wsum = 0.0;
  double w[11][11];
  for (int a = 0; a < win; ++a)
    for (int b = 0; b < win; ++b) {
      const double da = a - 5, db = b - 5;
      w[a][b] = std::exp(-(da * da + db * db) / (2.0 * sigma * sigma));
      wsum += w[a][b];
    }
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double acc = 0.0;
  int count = 0;
  for (int i = 0; i + win <= x.rows; ++i)
    for (int j = 0; j + win <= x.cols; ++j) {
      double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
      for (int a = 0; a < win; ++a)
        for (int b = 0; b < win; ++b) {
          const double ww = w[a][b] / wsum;
          const double xv = x(i + a, j + b), yv = y(i + a, j + b);
          mx += ww * xv;
          my += ww * yv;
          xx += ww * xv * xv;
          yy += ww * yv * yv;
          xy += ww * xv * yv;
        }
      const double vx = xx - mx * mx, vy = yy - my * my, cov = xy - mx * my;
      acc += ((2 * mx * my + c1) * (2 * cov + c2)) /
             ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return acc / count;
}

}  // namespace hsfuse::testing
