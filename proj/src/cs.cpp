#include "hsfuse/cs.hpp"

#include <cmath>

#include "hsfuse/rng.hpp"

namespace hsfuse {

GaussianMatrix gaussian_matrix(int m, int n, std::uint64_t seed) {
  require(m >= 1 && n >= 1 && m <= n, "invalid sampling-matrix dimensions");
  GaussianMatrix out;
  out.m = m;
  out.n = n;
  out.seed = seed;
  out.entries.resize(m, n);
  Rng rng(seed);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) out.entries(i, j) = rng.normal();
    out.entries.col(j).normalize();
  }
  return out;
}

int rows_for_ratio(double ratio, int n) {
  require(n >= 1, "block dimension must be positive");
  const int m = static_cast<int>(std::lround(ratio * n));
  require(m >= 1 && m <= n, "sampling ratio out of range");
  return m;
}

BlockSet extract_blocks(const GrayImage& image, int stride) {
  require(stride >= 1 && stride <= kBlockEdge, "block stride out of range");
  require(image.rows >= kBlockEdge && image.cols >= kBlockEdge,
          "image smaller than the block size");
  BlockSet set;
  set.image_rows = image.rows;
  set.image_cols = image.cols;
  set.stride = stride;
  set.grid_rows = (image.rows + stride - 1) / stride;
  set.grid_cols = (image.cols + stride - 1) / stride;
  // Drop grid positions whose block would start past the image when the
  // stride tiles exactly.
  while ((set.grid_rows - 1) * stride >= image.rows) --set.grid_rows;
  while ((set.grid_cols - 1) * stride >= image.cols) --set.grid_cols;
  set.blocks.reserve(static_cast<std::size_t>(set.grid_rows) * set.grid_cols);
  for (int bj = 0; bj < set.grid_cols; ++bj)
    for (int bi = 0; bi < set.grid_rows; ++bi) {
      Eigen::ArrayXd block = Eigen::ArrayXd::Zero(kBlockEdge * kBlockEdge);
      Eigen::Map<Eigen::MatrixXd> blk(block.data(), kBlockEdge, kBlockEdge);
      const int r0 = bi * stride, c0 = bj * stride;
      const int nr = std::min(kBlockEdge, image.rows - r0);
      const int nc = std::min(kBlockEdge, image.cols - c0);
      blk.topLeftCorner(nr, nc) = image.mat().block(r0, c0, nr, nc);
      set.blocks.push_back(std::move(block));
    }
  return set;
}

GrayImage assemble_blocks(const BlockSet& blocks) {
  require(blocks.stride == kBlockEdge, "assembly requires the non-overlapping tiling");
  require(static_cast<int>(blocks.blocks.size()) == blocks.grid_rows * blocks.grid_cols,
          "block count disagrees with grid geometry");
  GrayImage image(blocks.image_rows, blocks.image_cols);
  std::size_t idx = 0;
  for (int bj = 0; bj < blocks.grid_cols; ++bj)
    for (int bi = 0; bi < blocks.grid_rows; ++bi, ++idx) {
      Eigen::Map<const Eigen::MatrixXd> blk(blocks.blocks[idx].data(), kBlockEdge,
                                            kBlockEdge);
      const int r0 = bi * kBlockEdge, c0 = bj * kBlockEdge;
      const int nr = std::min(kBlockEdge, image.rows - r0);
      const int nc = std::min(kBlockEdge, image.cols - c0);
      image.mat().block(r0, c0, nr, nc) = blk.topLeftCorner(nr, nc);
    }
  return image;
}

Eigen::ArrayXd cs_au_forward(const Eigen::ArrayXd& f_prev, const Eigen::ArrayXd& r_prev,
                             const Eigen::ArrayXd& y, const DenseOperator& h,
                             const LayerParams& layer) {
  MeasurementSet meas;
  meas.primary = &h;
  meas.y_primary = y;
  return au_forward(f_prev, r_prev, meas, layer);
}

LadmmNetParams cs_train(const std::vector<Eigen::ArrayXd>& training_blocks,
                        const GaussianMatrix& h, int depth, int feature_maps,
                        const TrainingConfig& cfg, TrainResult* result) {
  require(!training_blocks.empty(), "empty training-block set");
  require(h.n == kBlockEdge * kBlockEdge, "sampling matrix does not match block size");
  LadmmNetParams params =
      init_params(kBlockEdge, kBlockEdge, 1, feature_maps, depth, cfg.seed);
  const DenseOperator op(h.entries);
  std::vector<TrainingSample> samples;
  samples.reserve(training_blocks.size());
  for (const Eigen::ArrayXd& block : training_blocks) {
    TrainingSample sample;
    sample.truth = block;
    sample.y_primary = op.forward(block);
    samples.push_back(std::move(sample));
  }
  TrainResult res = train(params, &op, nullptr, samples, cfg);
  if (result) *result = std::move(res);
  return params;
}

GrayImage cs_reconstruct(const std::vector<Eigen::ArrayXd>& block_measurements,
                         const BlockSet& geometry, const GaussianMatrix& h,
                         const LadmmNetParams& params) {
  require(params.rows == kBlockEdge && params.cols == kBlockEdge && params.bands == 1,
          "checkpoint geometry is not block-domain");
  require(block_measurements.size() == geometry.blocks.size(),
          "measurement count disagrees with block geometry");
  const DenseOperator op(h.entries);
  BlockSet recon = geometry;
  for (std::size_t i = 0; i < block_measurements.size(); ++i) {
    require(block_measurements[i].size() == h.m,
            "block measurement size disagrees with sampling matrix");
    MeasurementSet meas;
    meas.primary = &op;
    meas.y_primary = block_measurements[i];
    recon.blocks[i] = net_forward(params, meas);
  }
  return assemble_blocks(recon);
}

}  // namespace hsfuse
