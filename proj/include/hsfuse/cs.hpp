#pragma once

#include <cstdint>
#include <vector>

#include "hsfuse/cube.hpp"
#include "hsfuse/net.hpp"
#include "hsfuse/training.hpp"

namespace hsfuse {

inline constexpr int kBlockEdge = 33;

/// Random sampling matrix with iid standard-normal entries and columns
/// scaled to unit l2 norm; deterministic per seed.
struct GaussianMatrix {
  int m = 0;
  int n = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd entries;
};

GaussianMatrix gaussian_matrix(int m, int n, std::uint64_t seed);

/// Measurement-row count for a sampling ratio on n-dimensional blocks:
/// round(ratio * n).
int rows_for_ratio(double ratio, int n);

/// LinearOperator view of a dense matrix.
class DenseOperator : public LinearOperator {
 public:
  explicit DenseOperator(const Eigen::MatrixXd& mat) : mat_(mat) {}

  Eigen::Index domain_size() const override { return mat_.cols(); }
  Eigen::Index range_size() const override { return mat_.rows(); }
  Eigen::ArrayXd forward(const Eigen::ArrayXd& x) const override {
    require(x.size() == mat_.cols(), "dense operator input size mismatch");
    return (mat_ * x.matrix()).array();
  }
  Eigen::ArrayXd adjoint(const Eigen::ArrayXd& y) const override {
    require(y.size() == mat_.rows(), "dense operator measurement size mismatch");
    return (mat_.transpose() * y.matrix()).array();
  }

 private:
  const Eigen::MatrixXd& mat_;
};

/// 33 x 33 patches cut from an image on a regular grid, with the source
/// geometry kept for reassembly. A stride of kBlockEdge gives the
/// non-overlapping tiling used for reconstruction (edge blocks are
/// zero-padded and cropped on assembly); smaller strides harvest
/// overlapping training patches.
struct BlockSet {
  int image_rows = 0;
  int image_cols = 0;
  int stride = kBlockEdge;
  int grid_rows = 0;
  int grid_cols = 0;
  std::vector<Eigen::ArrayXd> blocks;  // each of length kBlockEdge^2, column-major
};

BlockSet extract_blocks(const GrayImage& image, int stride = kBlockEdge);

/// Inverse of the non-overlapping tiling; requires stride == kBlockEdge.
GrayImage assemble_blocks(const BlockSet& blocks);

/// Single-operator analog of the fusion AU (no secondary arm):
/// f_prev - (1/alpha) [H^T (H f_prev - y) + rho r_prev].
Eigen::ArrayXd cs_au_forward(const Eigen::ArrayXd& f_prev, const Eigen::ArrayXd& r_prev,
                             const Eigen::ArrayXd& y, const DenseOperator& h,
                             const LayerParams& layer);

/// Trains a block-domain network (33 x 33 x 1 geometry) on y = H * block
/// samples.
LadmmNetParams cs_train(const std::vector<Eigen::ArrayXd>& training_blocks,
                        const GaussianMatrix& h, int depth, int feature_maps,
                        const TrainingConfig& cfg, TrainResult* result = nullptr);

/// Reconstructs every block from its measurements and reassembles the
/// image (blocks are independent).
GrayImage cs_reconstruct(const std::vector<Eigen::ArrayXd>& block_measurements,
                         const BlockSet& geometry, const GaussianMatrix& h,
                         const LadmmNetParams& params);

}  // namespace hsfuse
