#pragma once

#include <string>

#include "hsfuse/cube.hpp"
#include "hsfuse/operator.hpp"

namespace hsfuse {

// Cube container: 16-byte header "SCUB" + u32le M, N, L, then M*N*L
// float32le values in band-major order. Ingest rejects non-finite values
// and rescales to [0,1] by the global max when the payload exceeds 1.
SpectralCube read_cube(const std::string& path);
void write_cube(const SpectralCube& cube, const std::string& path);

// Measurement container: "SSTK" + u32le rows, cols, shots, then the
// float64le detector values. Unlike cubes, measurements are stored
// verbatim: no rescaling on ingest and no precision loss.
ShotStack read_shots(const std::string& path);
void write_shots(const ShotStack& shots, const std::string& path);

// 8-bit image files. PGM (P5) and PPM (P6) are written natively; PNG is
// handled through libpng. Format is picked from the file extension.
GrayImage read_gray_image(const std::string& path);
void write_gray_image(const GrayImage& img, const std::string& path);
void write_rgb_image(const GrayImage& r, const GrayImage& g, const GrayImage& b,
                     const std::string& path);

}  // namespace hsfuse
