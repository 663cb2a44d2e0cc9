#pragma once

#include <array>

#include "hsfuse/cube.hpp"

namespace hsfuse {

/// Spatial degradation: each output pixel is the mean of its p x p input
/// block, per band. p must divide both spatial dimensions.
SpectralCube spatial_decimate(const SpectralCube& cube, int p);

/// Adjoint of spatial_decimate: spreads each value over its p x p block
/// with weight 1/p^2.
SpectralCube spatial_decimate_adjoint(const SpectralCube& low, int p);

/// Spectral degradation: output band l is the mean of input bands
/// l*q .. l*q+q-1. q must divide the band count.
SpectralCube spectral_decimate(const SpectralCube& cube, int q);

/// Adjoint of spectral_decimate: spreads each value over its q source
/// bands with weight 1/q.
SpectralCube spectral_decimate_adjoint(const SpectralCube& low, int q);

/// Min-max normalized RGB composite from three selected bands; each
/// channel mapped to [0,1] (a constant band maps to 0).
std::array<GrayImage, 3> rgb_composite(const SpectralCube& cube, int band_r,
                                       int band_g, int band_b);

}  // namespace hsfuse
