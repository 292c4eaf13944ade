#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hih/tensor.hpp"

namespace hih {

inline constexpr double kDefaultMargin = 0.2;

struct TripletResult {
  Tensor loss;             // scalar
  std::size_t n_tri = 0;   // hinge terms strictly above zero
};

/// Batch-all triplet loss over P x K x U x D embeddings (subject-major).
/// For every stripe, anchor, positive and negative the hinge
/// [m + d(a, p) - d(a, n)]+ is formed with euclidean d; the positive terms
/// are summed and divided by their count across all stripes (0 when none).
TripletResult triplet_loss(const Tensor& embeddings, double margin = kDefaultMargin);

// Softmax cross-entropy of B x U x N logits against B labels, averaged over
// the batch and the stripes.
Tensor cross_entropy(const Tensor& logits, std::span<const std::size_t> labels);

struct LossReport {
  double l_tri = 0.0;
  double l_ce = 0.0;
  double l_joint = 0.0;
  std::size_t n_tri = 0;
  double accuracy = 0.0;  // stripe-averaged logits, argmax against label
};

struct JointLoss {
  Tensor total;
  LossReport report;
};

// l_tri on the pre-BN embedding plus l_ce on the logits. `embedding` is
// B x U x D with B = p * k in subject-major order.
JointLoss joint_loss(const Tensor& embedding, const Tensor& logits,
                     std::span<const std::size_t> labels, std::size_t p, std::size_t k,
                     double margin = kDefaultMargin);

}  // namespace hih
