#pragma once

#include "hih/walker.hpp"

namespace hih {

inline constexpr double kMaxRotationDegrees = 15.0;

// x -> W - 1 - x for pixels and keypoints; left / right joints swap labels.
SequenceData hflip(const SequenceData& seq);

// Rotation by `degrees` (counter-clockwise on screen) about the frame
// centre. Silhouettes use nearest-neighbour resampling, keypoints the exact
// map. |degrees| must not exceed kMaxRotationDegrees.
SequenceData rotate(const SequenceData& seq, double degrees);

}  // namespace hih
