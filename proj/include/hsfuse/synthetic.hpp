#pragma once

#include <cstdint>

#include "hsfuse/cube.hpp"

namespace hsfuse {

/// Smooth random reflectance cube in [0,1]: a handful of spatial Gaussian
/// blobs, each modulated by a smooth spectral envelope. Deterministic per
/// seed; used for desk-scale experiments and tests.
SpectralCube synthetic_cube(int rows, int cols, int bands, std::uint64_t seed,
                            int blobs = 6);

/// Single-band variant for the grayscale pipeline.
GrayImage synthetic_image(int rows, int cols, std::uint64_t seed, int blobs = 8);

}  // namespace hsfuse
