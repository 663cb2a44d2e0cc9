#include "hsfuse/synthetic.hpp"

#include <cmath>

#include "hsfuse/rng.hpp"

namespace hsfuse {

SpectralCube synthetic_cube(int rows, int cols, int bands, std::uint64_t seed,
                            int blobs) {
  require(rows > 0 && cols > 0 && bands > 0 && blobs > 0, "invalid synthetic dims");
  Rng rng(seed);
  SpectralCube cube(rows, cols, bands);
  for (int g = 0; g < blobs; ++g) {
    const double ci = rng.uniform() * rows;
    const double cj = rng.uniform() * cols;
    const double si = (0.08 + 0.22 * rng.uniform()) * rows;
    const double sj = (0.08 + 0.22 * rng.uniform()) * cols;
    const double amp = 0.3 + 0.7 * rng.uniform();
    // Smooth spectral envelope: raised cosine with random center/width.
    const double lc = rng.uniform() * bands;
    const double lw = (0.3 + 0.7 * rng.uniform()) * bands;
    for (int l = 0; l < bands; ++l) {
      const double t = (l - lc) / lw;
      const double env = std::abs(t) < 1.0 ? 0.5 * (1.0 + std::cos(M_PI * t)) : 0.0;
      if (env == 0.0) continue;
      auto band = cube.band(l);
      for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) {
          const double di = (i - ci) / si;
          const double dj = (j - cj) / sj;
          band(i, j) += amp * env * std::exp(-0.5 * (di * di + dj * dj));
        }
    }
  }
  const double peak = cube.data.maxCoeff();
  if (peak > 0.0) cube.data /= peak;
  return cube;
}

GrayImage synthetic_image(int rows, int cols, std::uint64_t seed, int blobs) {
  const SpectralCube cube = synthetic_cube(rows, cols, 1, seed, blobs);
  GrayImage img(rows, cols);
  img.data = cube.data;
  return img;
}

}  // namespace hsfuse
