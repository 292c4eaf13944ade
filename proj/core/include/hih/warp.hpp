#pragma once

#include "hih/tensor.hpp"

namespace hih {

// Offset fields are displacement maps in pixel / frame units.
//
// Spatial field: 2 x T x H x W (channel 0 = dx, channel 1 = dy), or 2 x H x W
// applied to every frame. Spatio-temporal field: 3 x T x H x W (dx, dy, dz).
//
// Samples falling outside the volume read zero; fractional samples near the
// border blend with that zero. At exactly integer sample coordinates the
// offset gradient uses the interpolation cell to the right.

// out(c,t,y,x) = bilinear sample of input(c,t,.,.) at (y + dy, x + dx).
Tensor bilinear_warp(const Tensor& input, const Tensor& offsets);

// out(c,t,y,x) = trilinear sample of input(c,.,.,.) at (t + dz, y + dy, x + dx).
Tensor trilinear_warp(const Tensor& input, const Tensor& offsets);

}  // namespace hih
