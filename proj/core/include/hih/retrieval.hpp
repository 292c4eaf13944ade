#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hih {

struct RetrievalEntry {
  std::string sequence_id;  // unique across the split, e.g. "s003/nm-01"
  std::string subject;
  std::string sequence;     // per-subject sequence tag, e.g. "nm-01"
  std::string view;
  std::string covariate;
  std::vector<double> embedding;  // U x D, row-major
};

enum class Exclusion { none, identical_view };

struct ProbeGallerySplit {
  std::vector<RetrievalEntry> probes;
  std::vector<RetrievalEntry> gallery;
  std::size_t stripes = 1;
  Exclusion exclusion = Exclusion::none;
  std::string protocol;
  // Emit the probe-view x gallery-view breakdown.
  bool per_view = false;
};

struct ProbeOutcome {
  bool valid = false;           // false: no positive left after exclusion
  std::size_t first_hit = 0;    // 1-based rank of the first positive
  double average_precision = 0.0;
  double inverse_negative_penalty = 0.0;
};

/// Rank-k, mAP and mINP (fractions in [0, 1]) over the valid probes.
struct MetricSummary {
  double rank1 = 0.0, rank5 = 0.0, rank10 = 0.0, rank20 = 0.0;
  double map = 0.0, minp = 0.0;
  std::size_t evaluated = 0;
  std::size_t dropped = 0;
};

struct MetricReport {
  std::string protocol;
  Exclusion exclusion = Exclusion::none;
  MetricSummary overall;
  // Filled when split.per_view: rank-1 per probe view over the whole
  // gallery, and the probe x gallery view matrix (nullopt where excluded or
  // undefined).
  std::vector<std::string> views;
  std::vector<double> per_view_rank1;
  std::vector<std::vector<std::optional<double>>> view_matrix;
  double view_mean = 0.0;
  double view_std = 0.0;  // sample standard deviation across probe views
};

// Ranks `gallery` by ascending retrieval distance to `probe`; equal
// distances keep sequence-id order. Excluded entries are omitted.
std::vector<std::size_t> rank_gallery(const RetrievalEntry& probe,
                                      const std::vector<RetrievalEntry>& gallery,
                                      std::size_t stripes, Exclusion exclusion);

ProbeOutcome score_probe(const RetrievalEntry& probe, const std::vector<RetrievalEntry>& gallery,
                         std::size_t stripes, Exclusion exclusion);

MetricReport evaluate(const ProbeGallerySplit& split);

struct ProtocolOptions {
  std::string name = "gait3d-style";
  std::uint64_t seed = 0;
  std::string probe_sequence = "nm-00";               // oumvlp-style
  std::string gallery_sequence = "nm-01";             // oumvlp-style
  std::vector<std::string> gallery_sequences{"nm-01", "nm-02", "nm-03", "nm-04"};  // casia-style
  // cross-dataset: dataset roots used for training and evaluation.
  std::string train_root;
  std::string eval_root;
};

/// gait3d-style: one seeded random probe per subject, rest gallery.
/// oumvlp-style: probe / gallery by sequence tag, identical-view exclusion.
/// casia-style: designated gallery tags, every other sequence a probe,
/// identical-view exclusion and per-view breakdown.
/// cross-dataset: gait3d-style on an evaluation set distinct from training.
ProbeGallerySplit build_protocol(const std::vector<RetrievalEntry>& entries, std::size_t stripes,
                                 const ProtocolOptions& options);

std::string report_json(const MetricReport& report);
std::string report_table(const MetricReport& report);
void write_distance_csv(std::ostream& out, const ProbeGallerySplit& split);

}  // namespace hih
