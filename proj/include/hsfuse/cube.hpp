#pragma once

#include <Eigen/Core>

#include <stdexcept>

namespace hsfuse {

/// Dense M x N x L volume stored band-major: band 0 raster (column-major,
/// row index fastest), then band 1, and so on. The flat index of voxel
/// (i, j, l) is i + j*M + l*M*N, matching the vectorization used by the
/// measurement operators.
struct SpectralCube {
  int rows = 0;   // M
  int cols = 0;   // N
  int bands = 0;  // L
  Eigen::ArrayXd data;

  SpectralCube() = default;
  SpectralCube(int m, int n, int l)
      : rows(m), cols(n), bands(l),
        data(Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(m) * n * l)) {}

  Eigen::Index size() const { return data.size(); }

  double& operator()(int i, int j, int l) {
    return data[i + static_cast<Eigen::Index>(j) * rows +
                static_cast<Eigen::Index>(l) * rows * cols];
  }
  double operator()(int i, int j, int l) const {
    return data[i + static_cast<Eigen::Index>(j) * rows +
                static_cast<Eigen::Index>(l) * rows * cols];
  }

  Eigen::Map<Eigen::MatrixXd> band(int l) {
    return {data.data() + static_cast<Eigen::Index>(l) * rows * cols, rows, cols};
  }
  Eigen::Map<const Eigen::MatrixXd> band(int l) const {
    return {data.data() + static_cast<Eigen::Index>(l) * rows * cols, rows, cols};
  }

  bool same_dims(const SpectralCube& o) const {
    return rows == o.rows && cols == o.cols && bands == o.bands;
  }
};

/// Single-band image, same storage convention as one cube band.
struct GrayImage {
  int rows = 0;
  int cols = 0;
  Eigen::ArrayXd data;

  GrayImage() = default;
  GrayImage(int m, int n)
      : rows(m), cols(n), data(Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(m) * n)) {}

  double& operator()(int i, int j) { return data[i + static_cast<Eigen::Index>(j) * rows]; }
  double operator()(int i, int j) const {
    return data[i + static_cast<Eigen::Index>(j) * rows];
  }

  Eigen::Map<Eigen::MatrixXd> mat() { return {data.data(), rows, cols}; }
  Eigen::Map<const Eigen::MatrixXd> mat() const { return {data.data(), rows, cols}; }
};

/// Transform-domain volume (DCT coefficients, conv feature maps, ...).
/// Identical layout to SpectralCube with `channels` in place of bands.
struct FeatureCube {
  int rows = 0;
  int cols = 0;
  int channels = 0;
  Eigen::ArrayXd data;

  FeatureCube() = default;
  FeatureCube(int m, int n, int c)
      : rows(m), cols(n), channels(c),
        data(Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(m) * n * c)) {}

  Eigen::Map<Eigen::MatrixXd> channel(int c) {
    return {data.data() + static_cast<Eigen::Index>(c) * rows * cols, rows, cols};
  }
  Eigen::Map<const Eigen::MatrixXd> channel(int c) const {
    return {data.data() + static_cast<Eigen::Index>(c) * rows * cols, rows, cols};
  }
};

inline void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace hsfuse
