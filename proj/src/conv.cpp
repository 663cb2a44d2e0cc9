#include "hsfuse/conv.hpp"

#include <cmath>

#include "hsfuse/rng.hpp"

namespace hsfuse {

namespace {

// Overlap of the shifted plane in(i+a, j+b) with the output plane.
struct Overlap {
  int r0, c0, nr, nc;  // region in the output plane
};

Overlap overlap_region(int rows, int cols, int a, int b) {
  Overlap o;
  o.r0 = std::max(0, -a);
  o.c0 = std::max(0, -b);
  o.nr = rows - std::abs(a);
  o.nc = cols - std::abs(b);
  return o;
}

}  // namespace

Eigen::ArrayXd conv2d(const Eigen::ArrayXd& in, int rows, int cols,
                      const ConvKernel& k) {
  const Eigen::Index plane = static_cast<Eigen::Index>(rows) * cols;
  require(in.size() == plane * k.in_ch, "conv input size mismatch");
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(plane * k.out_ch);
  for (int o = 0; o < k.out_ch; ++o) {
    Eigen::Map<Eigen::MatrixXd> dst(out.data() + o * plane, rows, cols);
    for (int c = 0; c < k.in_ch; ++c) {
      Eigen::Map<const Eigen::MatrixXd> src(in.data() + c * plane, rows, cols);
      for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b) {
          const double wv = k.at(o, c, a, b);
          if (wv == 0.0) continue;
          const Overlap ov = overlap_region(rows, cols, a, b);
          dst.block(ov.r0, ov.c0, ov.nr, ov.nc) +=
              wv * src.block(ov.r0 + a, ov.c0 + b, ov.nr, ov.nc);
        }
    }
  }
  return out;
}

Eigen::ArrayXd conv2d_input_grad(const Eigen::ArrayXd& gout, int rows, int cols,
                                 const ConvKernel& k) {
  const Eigen::Index plane = static_cast<Eigen::Index>(rows) * cols;
  require(gout.size() == plane * k.out_ch, "conv gradient size mismatch");
  Eigen::ArrayXd gin = Eigen::ArrayXd::Zero(plane * k.in_ch);
  for (int o = 0; o < k.out_ch; ++o) {
    Eigen::Map<const Eigen::MatrixXd> g(gout.data() + o * plane, rows, cols);
    for (int c = 0; c < k.in_ch; ++c) {
      Eigen::Map<Eigen::MatrixXd> dst(gin.data() + c * plane, rows, cols);
      for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b) {
          const double wv = k.at(o, c, a, b);
          if (wv == 0.0) continue;
          // d out(i,j) / d in(i+a, j+b) = w, so gin(i+a, j+b) += w * g(i, j).
          const Overlap ov = overlap_region(rows, cols, a, b);
          dst.block(ov.r0 + a, ov.c0 + b, ov.nr, ov.nc) +=
              wv * g.block(ov.r0, ov.c0, ov.nr, ov.nc);
        }
    }
  }
  return gin;
}

void conv2d_kernel_grad(const Eigen::ArrayXd& in, const Eigen::ArrayXd& gout,
                        int rows, int cols, ConvKernel& grad) {
  const Eigen::Index plane = static_cast<Eigen::Index>(rows) * cols;
  require(in.size() == plane * grad.in_ch && gout.size() == plane * grad.out_ch,
          "conv kernel-gradient size mismatch");
  for (int o = 0; o < grad.out_ch; ++o) {
    Eigen::Map<const Eigen::MatrixXd> g(gout.data() + o * plane, rows, cols);
    for (int c = 0; c < grad.in_ch; ++c) {
      Eigen::Map<const Eigen::MatrixXd> src(in.data() + c * plane, rows, cols);
      for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b) {
          const Overlap ov = overlap_region(rows, cols, a, b);
          grad.at(o, c, a, b) +=
              (g.block(ov.r0, ov.c0, ov.nr, ov.nc).array() *
               src.block(ov.r0 + a, ov.c0 + b, ov.nr, ov.nc).array())
                  .sum();
        }
    }
  }
}

Eigen::ArrayXd conv_transform_apply(const ConvTransformParams& params,
                                    const Eigen::ArrayXd& in, int rows, int cols,
                                    ConvTransformCache* cache) {
  Eigen::ArrayXd pre = conv2d(in, rows, cols, params.kernel1);
  Eigen::ArrayXd hidden = pre.max(0.0);
  Eigen::ArrayXd out = conv2d(hidden, rows, cols, params.kernel2);
  if (cache) {
    cache->input = in;
    cache->pre_act = std::move(pre);
    cache->hidden = std::move(hidden);
    cache->output = out;
  }
  return out;
}

Eigen::ArrayXd conv_transform_backward(const ConvTransformParams& params,
                                       const ConvTransformCache& cache, int rows,
                                       int cols, const Eigen::ArrayXd& gout,
                                       ConvTransformParams& grads) {
  conv2d_kernel_grad(cache.hidden, gout, rows, cols, grads.kernel2);
  Eigen::ArrayXd ghidden = conv2d_input_grad(gout, rows, cols, params.kernel2);
  // ReLU subgradient: 0 at the kink.
  Eigen::ArrayXd gpre =
      (cache.pre_act > 0.0).select(ghidden, Eigen::ArrayXd::Zero(ghidden.size()));
  conv2d_kernel_grad(cache.input, gpre, rows, cols, grads.kernel1);
  return conv2d_input_grad(gpre, rows, cols, params.kernel1);
}

FeatureCube nft_forward(const SpectralCube& cube, const ConvTransformParams& params) {
  require(params.bands == cube.bands, "transform band count disagrees with cube");
  FeatureCube out(cube.rows, cube.cols, cube.bands);
  out.data = conv_transform_apply(params, cube.data, cube.rows, cube.cols);
  return out;
}

SpectralCube nit_forward(const FeatureCube& features, const ConvTransformParams& params) {
  require(params.bands == features.channels, "transform band count disagrees with input");
  SpectralCube out(features.rows, features.cols, features.channels);
  out.data = conv_transform_apply(params, features.data, features.rows, features.cols);
  return out;
}

ConvTransformParams xavier_conv_params(int feature_maps, int bands, std::uint64_t seed) {
  require(feature_maps >= 1 && bands >= 1, "invalid transform sizes");
  ConvTransformParams params(feature_maps, bands);
  Rng rng(seed);
  auto fill = [&rng](ConvKernel& k) {
    const double bound = std::sqrt(6.0 / (9.0 * k.in_ch + 9.0 * k.out_ch));
    for (Eigen::Index i = 0; i < k.w.size(); ++i)
      k.w[i] = bound * (2.0 * rng.uniform() - 1.0);
  };
  fill(params.kernel1);
  fill(params.kernel2);
  return params;
}

ConvTransformParams identity_conv_params(int bands) {
  ConvTransformParams params(bands, bands);
  for (int c = 0; c < bands; ++c) {
    params.kernel1.at(c, c, 0, 0) = 1.0;
    params.kernel2.at(c, c, 0, 0) = 1.0;
  }
  return params;
}

}  // namespace hsfuse
