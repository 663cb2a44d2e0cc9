#pragma once

#include <cstdint>
#include <string>

#include "hsfuse/cube.hpp"

namespace hsfuse {

/// Binary colored coded apertures for a multi-snapshot 3D-CASSI system.
/// mask(w,i,j,l) in {0,1}; across the W snapshots every spatial-spectral
/// voxel is selected exactly once (complementary design), and per shot a
/// pixel selects floor(L/W) or ceil(L/W) bands.
struct CodedApertureStack {
  int rows = 0;
  int cols = 0;
  int bands = 0;
  int shots = 0;  // W
  Eigen::ArrayXd mask;  // index: i + j*rows + l*rows*cols + w*rows*cols*bands

  CodedApertureStack() = default;
  CodedApertureStack(int m, int n, int l, int w)
      : rows(m), cols(n), bands(l), shots(w),
        mask(Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(m) * n * l * w)) {}

  double operator()(int w, int i, int j, int l) const {
    return mask[i + static_cast<Eigen::Index>(j) * rows +
                static_cast<Eigen::Index>(l) * rows * cols +
                static_cast<Eigen::Index>(w) * rows * cols * bands];
  }
  double& operator()(int w, int i, int j, int l) {
    return mask[i + static_cast<Eigen::Index>(j) * rows +
                static_cast<Eigen::Index>(l) * rows * cols +
                static_cast<Eigen::Index>(w) * rows * cols * bands];
  }

  Eigen::Map<const Eigen::MatrixXd> shot_band(int w, int l) const {
    return {mask.data() + static_cast<Eigen::Index>(l) * rows * cols +
                static_cast<Eigen::Index>(w) * rows * cols * bands,
            rows, cols};
  }
};

/// Per-pixel random band permutation split round-robin across the W
/// shots; satisfies the complementary-design invariants by construction
/// and is deterministic for a fixed seed.
CodedApertureStack design_apertures(int rows, int cols, int bands, int shots,
                                    std::uint64_t seed);

/// Captured-samples to target-voxels ratio, W/L.
double compression_ratio(int shots, int bands);

/// Snapshot count for a requested ratio: round(ratio * bands), at least 1
/// required (throws when the rounding hits zero) and at most bands.
int shots_for_ratio(double ratio, int bands);

/// One cube file per shot (values 0/1) plus a JSON manifest describing
/// the arm geometry.
void save_apertures(const CodedApertureStack& stack, const std::string& arm,
                    int p, int q, std::uint64_t seed, const std::string& dir,
                    const std::string& prefix);
CodedApertureStack load_apertures(const std::string& manifest_path);

}  // namespace hsfuse
