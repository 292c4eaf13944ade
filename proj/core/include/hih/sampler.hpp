#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "hih/ops.hpp"

namespace hih {

// Frame counts are drawn uniformly from [min_frames, max_frames].
struct FramePolicy {
  std::size_t min_frames = 30;
  std::size_t max_frames = 30;
};

struct BatchPlan {
  std::size_t p = 8;  // subjects per batch
  std::size_t k = 8;  // sequences per subject
  FramePolicy frames;

  void validate() const;
};

struct DatasetIndex {
  // subject label -> indices of that subject's sequences
  std::vector<std::vector<std::size_t>> sequences_by_subject;
  // sequence index -> frame count
  std::vector<std::size_t> frame_counts;
};

struct SampleRef {
  std::size_t sequence = 0;
  std::size_t label = 0;
  // Frame indices in playback order. Windows longer than the sequence wrap
  // around to its start.
  std::vector<std::size_t> frames;
};

/// P distinct subjects, K sequences each, subject-major order. Subjects with
/// fewer than K sequences are drawn with replacement. Each sequence gets a
/// contiguous frame window at a random offset.
std::vector<SampleRef> sample_batch(const DatasetIndex& index, const BatchPlan& plan,
                                    std::mt19937_64& rng);

// p <- p - lr * g
void sgd_step(std::span<double> params, std::span<const double> grads, double lr);
// Applies the step to every parameter holding a gradient.
void sgd_step(const ParameterList& params, double lr);

// Global L2 norm of all accumulated gradients. When it exceeds `max_norm`
// (> 0), every gradient is scaled by max_norm / norm. Returns the norm
// before scaling.
double clip_grad_norm(const ParameterList& params, double max_norm);

}  // namespace hih
