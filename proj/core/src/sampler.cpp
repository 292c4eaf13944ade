#include "hih/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hih/errors.hpp"

namespace hih {

void BatchPlan::validate() const {
  if (p < 2 || k < 2) throw ConfigError("batch plan needs P >= 2 and K >= 2");
  if (frames.min_frames == 0 || frames.min_frames > frames.max_frames) {
    throw ConfigError("frame policy needs 1 <= min_frames <= max_frames");
  }
}

std::vector<SampleRef> sample_batch(const DatasetIndex& index, const BatchPlan& plan,
                                    std::mt19937_64& rng) {
  plan.validate();
  std::vector<std::size_t> subjects;
  for (std::size_t s = 0; s < index.sequences_by_subject.size(); ++s)
    if (!index.sequences_by_subject[s].empty()) subjects.push_back(s);
  if (subjects.size() < plan.p) {
    throw ConfigError("sample_batch: " + std::to_string(subjects.size()) +
                      " subjects with sequences, batch needs " + std::to_string(plan.p));
  }
  std::shuffle(subjects.begin(), subjects.end(), rng);
  subjects.resize(plan.p);

  std::uniform_int_distribution<std::size_t> length(plan.frames.min_frames, plan.frames.max_frames);
  std::vector<SampleRef> batch;
  batch.reserve(plan.p * plan.k);
  for (std::size_t s : subjects) {
    std::vector<std::size_t> seqs = index.sequences_by_subject[s];
    std::vector<std::size_t> chosen;
    if (seqs.size() >= plan.k) {
      std::shuffle(seqs.begin(), seqs.end(), rng);
      chosen.assign(seqs.begin(), seqs.begin() + static_cast<long>(plan.k));
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, seqs.size() - 1);
      for (std::size_t i = 0; i < plan.k; ++i) chosen.push_back(seqs[pick(rng)]);
    }
    for (std::size_t seq : chosen) {
      const std::size_t available = index.frame_counts.at(seq);
      if (available == 0) throw ConfigError("sample_batch: sequence " + std::to_string(seq) + " has no frames");
      const std::size_t n = length(rng);
      std::size_t start = 0;
      if (available > n) start = std::uniform_int_distribution<std::size_t>(0, available - n)(rng);
      SampleRef ref{seq, s, {}};
      ref.frames.resize(n);
      for (std::size_t f = 0; f < n; ++f) ref.frames[f] = (start + f) % available;
      batch.push_back(std::move(ref));
    }
  }
  return batch;
}

void sgd_step(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != grads.size()) {
    throw DimensionError("sgd_step: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
}

double clip_grad_norm(const ParameterList& params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params)
    for (double g : p.tensor.grad()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double f = max_norm / norm;
    for (const auto& p : params) {
      Tensor t = p.tensor;
      if (!t.has_grad()) continue;
      for (double& g : t.mutable_grad()) g *= f;
    }
  }
  return norm;
}

void sgd_step(const ParameterList& params, double lr) {
  for (const auto& [name, t] : params) {
    if (!t.has_grad()) continue;
    Tensor p = t;
    sgd_step(p.mutable_data(), p.grad(), lr);
  }
}

}  // namespace hih
