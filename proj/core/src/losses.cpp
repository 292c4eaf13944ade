#include "hih/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hih/errors.hpp"
#include "hih/ops.hpp"

namespace hih {

TripletResult triplet_loss(const Tensor& embeddings, double margin) {
  if (embeddings.rank() != 4) {
    throw DimensionError("triplet_loss: expected P x K x U x D, got " + shape_str(embeddings.shape()));
  }
  const std::size_t p = embeddings.dim(0), k = embeddings.dim(1);
  const std::size_t u = embeddings.dim(2), d = embeddings.dim(3);
  if (p < 2 || k < 2) throw ConfigError("triplet_loss: needs P >= 2 and K >= 2");
  if (!(margin >= 0.0)) throw ConfigError("triplet_loss: margin must be >= 0");
  const std::size_t b = p * k;
  auto x = embeddings.data();
  auto at = [&](std::size_t i, std::size_t s) { return x.data() + (i * u + s) * d; };

  // dist[(s * b + i) * b + j]
  std::vector<double> dist(u * b * b, 0.0);
  for (std::size_t s = 0; s < u; ++s)
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = i + 1; j < b; ++j) {
        const double* xi = at(i, s);
        const double* xj = at(j, s);
        double sq = 0.0;
        for (std::size_t c = 0; c < d; ++c) sq += (xi[c] - xj[c]) * (xi[c] - xj[c]);
        dist[(s * b + i) * b + j] = dist[(s * b + j) * b + i] = std::sqrt(sq);
      }

  // Coefficient of each distance in the summed active hinges.
  std::vector<double> coeff(u * b * b, 0.0);
  double total = 0.0;
  std::size_t active = 0;
  for (std::size_t s = 0; s < u; ++s)
    for (std::size_t a = 0; a < b; ++a) {
      const std::size_t subj = a / k;
      const double* row = &dist[(s * b + a) * b];
      for (std::size_t pos = subj * k; pos < subj * k + k; ++pos) {
        if (pos == a) continue;
        for (std::size_t n = 0; n < b; ++n) {
          if (n / k == subj) continue;
          const double h = margin + row[pos] - row[n];
          if (h > 0.0) {
            total += h;
            ++active;
            coeff[(s * b + a) * b + pos] += 1.0;
            coeff[(s * b + a) * b + n] -= 1.0;
          }
        }
      }
    }
  const double inv = active ? 1.0 / static_cast<double>(active) : 0.0;
  TripletResult result;
  result.n_tri = active;
  result.loss = make_op(
      "triplet_loss", {}, {total * inv}, {embeddings},
      [embeddings, dist = std::move(dist), coeff = std::move(coeff), inv, b, u, d](const BackwardContext& ctx) {
        if (inv == 0.0) return;
        const double g = ctx.grad_out()[0] * inv;
        auto x = embeddings.data();
        auto gx = ctx.grad_in(0);
        for (std::size_t s = 0; s < u; ++s)
          for (std::size_t i = 0; i < b; ++i)
            for (std::size_t j = 0; j < b; ++j) {
              const std::size_t idx = (s * b + i) * b + j;
              // Zero distance: subgradient 0.
              if (coeff[idx] == 0.0 || dist[idx] == 0.0) continue;
              const double w = g * coeff[idx] / dist[idx];
              const std::size_t oi = (i * u + s) * d, oj = (j * u + s) * d;
              for (std::size_t c = 0; c < d; ++c) {
                const double diff = w * (x[oi + c] - x[oj + c]);
                gx[oi + c] += diff;
                gx[oj + c] -= diff;
              }
            }
      });
  return result;
}

Tensor cross_entropy(const Tensor& logits, std::span<const std::size_t> labels) {
  if (logits.rank() != 3) {
    throw DimensionError("cross_entropy: expected B x U x N logits, got " + shape_str(logits.shape()));
  }
  const std::size_t b = logits.dim(0), u = logits.dim(1), n = logits.dim(2);
  if (labels.size() != b) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for batch " +
                         std::to_string(b));
  }
  for (std::size_t l : labels)
    if (l >= n) {
      throw ConfigError("cross_entropy: label " + std::to_string(l) + " outside [0, " +
                        std::to_string(n) + ")");
    }
  auto z = logits.data();
  std::vector<double> prob(z.size());
  double total = 0.0;
  for (std::size_t r = 0; r < b * u; ++r) {
    const double* row = z.data() + r * n;
    double mx = row[0];
    for (std::size_t c = 1; c < n; ++c) mx = std::max(mx, row[c]);
    double se = 0.0;
    for (std::size_t c = 0; c < n; ++c) se += std::exp(row[c] - mx);
    const double lse = mx + std::log(se);
    for (std::size_t c = 0; c < n; ++c) prob[r * n + c] = std::exp(row[c] - lse);
    total += lse - row[labels[r / u]];
  }
  const double inv = 1.0 / static_cast<double>(b * u);
  std::vector<std::size_t> lab(labels.begin(), labels.end());
  return make_op("cross_entropy", {}, {total * inv}, {logits},
                 [prob = std::move(prob), lab = std::move(lab), u, n, inv](const BackwardContext& ctx) {
                   const double g = ctx.grad_out()[0] * inv;
                   auto gz = ctx.grad_in(0);
                   for (std::size_t r = 0; r < prob.size() / n; ++r)
                     for (std::size_t c = 0; c < n; ++c) {
                       const double target = c == lab[r / u] ? 1.0 : 0.0;
                       gz[r * n + c] += g * (prob[r * n + c] - target);
                     }
                 });
}

JointLoss joint_loss(const Tensor& embedding, const Tensor& logits, std::span<const std::size_t> labels,
                     std::size_t p, std::size_t k, double margin) {
  if (embedding.rank() != 3 || embedding.dim(0) != p * k) {
    throw DimensionError("joint_loss: embedding " + shape_str(embedding.shape()) + " is not " +
                         std::to_string(p * k) + " x U x D");
  }
  const TripletResult tri =
      triplet_loss(reshape(embedding, {p, k, embedding.dim(1), embedding.dim(2)}), margin);
  const Tensor ce = cross_entropy(logits, labels);
  JointLoss out;
  out.total = tri.loss + ce;
  out.report.l_tri = tri.loss.item();
  out.report.l_ce = ce.item();
  out.report.l_joint = out.total.item();
  out.report.n_tri = tri.n_tri;

  const std::size_t b = logits.dim(0), u = logits.dim(1), n = logits.dim(2);
  auto z = logits.data();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < b; ++i) {
    std::size_t best = 0;
    double best_v = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      double acc = 0.0;
      for (std::size_t s = 0; s < u; ++s) acc += z[(i * u + s) * n + c];
      if (c == 0 || acc > best_v) {
        best_v = acc;
        best = c;
      }
    }
    correct += best == labels[i];
  }
  out.report.accuracy = static_cast<double>(correct) / static_cast<double>(b);
  return out;
}

}  // namespace hih
