#pragma once

#include <cstdint>

#include "hsfuse/cube.hpp"
#include "hsfuse/transforms.hpp"

namespace hsfuse {

/// Bank of 3x3 cross-channel filters, bias-free, zero-padded "same"
/// output. Weight of (out channel o, in channel c, row offset a, col
/// offset b) lives at ((o*in_ch + c)*3 + a+1)*3 + b+1.
struct ConvKernel {
  int out_ch = 0;
  int in_ch = 0;
  Eigen::ArrayXd w;

  ConvKernel() = default;
  ConvKernel(int out_channels, int in_channels)
      : out_ch(out_channels), in_ch(in_channels),
        w(Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(out_channels) * in_channels * 9)) {}

  double& at(int o, int c, int a, int b) {
    return w[((static_cast<Eigen::Index>(o) * in_ch + c) * 3 + a + 1) * 3 + b + 1];
  }
  double at(int o, int c, int a, int b) const {
    return w[((static_cast<Eigen::Index>(o) * in_ch + c) * 3 + a + 1) * 3 + b + 1];
  }
};

// Channel-planar volumes (rows*cols per channel, channel-major), same
// layout as SpectralCube / FeatureCube data.
Eigen::ArrayXd conv2d(const Eigen::ArrayXd& in, int rows, int cols,
                      const ConvKernel& k);
Eigen::ArrayXd conv2d_input_grad(const Eigen::ArrayXd& gout, int rows, int cols,
                                 const ConvKernel& k);
void conv2d_kernel_grad(const Eigen::ArrayXd& in, const Eigen::ArrayXd& gout,
                        int rows, int cols, ConvKernel& grad);

/// Two bias-free 3x3 convolutions with a ReLU in between: the building
/// block of both the forward (NFT) and inverse (NIT) learnable
/// transforms. kernel1 maps `bands` channels to `feature_maps`, kernel2
/// maps back; 18 * F * L weights in total.
struct ConvTransformParams {
  int feature_maps = 0;  // F
  int bands = 0;         // L
  ConvKernel kernel1;    // F filters of size 3 x 3 x L
  ConvKernel kernel2;    // L filters of size 3 x 3 x F

  ConvTransformParams() = default;
  ConvTransformParams(int f, int l)
      : feature_maps(f), bands(l), kernel1(f, l), kernel2(l, f) {}

  Eigen::Index param_count() const { return kernel1.w.size() + kernel2.w.size(); }
};

/// Intermediates of one conv-ReLU-conv application, kept for the
/// reverse pass.
struct ConvTransformCache {
  Eigen::ArrayXd input;
  Eigen::ArrayXd pre_act;   // conv1 output before ReLU
  Eigen::ArrayXd hidden;    // after ReLU
  Eigen::ArrayXd output;
};

Eigen::ArrayXd conv_transform_apply(const ConvTransformParams& params,
                                    const Eigen::ArrayXd& in, int rows, int cols,
                                    ConvTransformCache* cache = nullptr);

/// Reverse pass; accumulates kernel gradients into `grads` and returns
/// the gradient with respect to the input.
Eigen::ArrayXd conv_transform_backward(const ConvTransformParams& params,
                                       const ConvTransformCache& cache, int rows,
                                       int cols, const Eigen::ArrayXd& gout,
                                       ConvTransformParams& grads);

FeatureCube nft_forward(const SpectralCube& cube, const ConvTransformParams& params);
SpectralCube nit_forward(const FeatureCube& features, const ConvTransformParams& params);

/// Xavier-uniform kernel initialization, deterministic per seed.
ConvTransformParams xavier_conv_params(int feature_maps, int bands, std::uint64_t seed);

/// Delta kernels that make conv-ReLU-conv the identity on nonnegative
/// input (requires feature_maps == bands). Test and reference helper.
ConvTransformParams identity_conv_params(int bands);

/// SparsifyingTransform view over an NFT/NIT parameter pair.
class ConvTransformPair : public SparsifyingTransform {
 public:
  ConvTransformPair(const ConvTransformParams& nft, const ConvTransformParams& nit,
                    int rows, int cols)
      : nft_(nft), nit_(nit), rows_(rows), cols_(cols) {}

  Eigen::ArrayXd forward(const Eigen::ArrayXd& x) const override {
    return conv_transform_apply(nft_, x, rows_, cols_);
  }
  Eigen::ArrayXd inverse(const Eigen::ArrayXd& c) const override {
    return conv_transform_apply(nit_, c, rows_, cols_);
  }

 private:
  const ConvTransformParams& nft_;
  const ConvTransformParams& nit_;
  int rows_, cols_;
};

}  // namespace hsfuse
