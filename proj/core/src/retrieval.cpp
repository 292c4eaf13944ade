#include "hih/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "hih/errors.hpp"
#include "hih/model.hpp"
#include "hih/parallel.hpp"
#include "json.hpp"

namespace hih {

namespace {

bool excluded(const RetrievalEntry& probe, const RetrievalEntry& g, Exclusion exclusion) {
  return exclusion == Exclusion::identical_view && probe.view == g.view;
}

std::string exclusion_name(Exclusion e) { return e == Exclusion::none ? "none" : "identical_view"; }

MetricSummary summarize(const std::vector<ProbeOutcome>& outcomes) {
  MetricSummary s;
  for (const auto& o : outcomes) {
    if (!o.valid) {
      ++s.dropped;
      continue;
    }
    ++s.evaluated;
    s.rank1 += o.first_hit <= 1;
    s.rank5 += o.first_hit <= 5;
    s.rank10 += o.first_hit <= 10;
    s.rank20 += o.first_hit <= 20;
    s.map += o.average_precision;
    s.minp += o.inverse_negative_penalty;
  }
  if (s.evaluated > 0) {
    const double n = static_cast<double>(s.evaluated);
    for (double* v : {&s.rank1, &s.rank5, &s.rank10, &s.rank20, &s.map, &s.minp}) *v /= n;
  }
  return s;
}

std::vector<ProbeOutcome> score_all(const std::vector<RetrievalEntry>& probes,
                                    const std::vector<RetrievalEntry>& gallery, std::size_t stripes,
                                    Exclusion exclusion) {
  std::vector<ProbeOutcome> out(probes.size());
  const long n = static_cast<long>(probes.size());
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (long i = 0; i < n; ++i) out[i] = score_probe(probes[i], gallery, stripes, exclusion);
  return out;
}

}  // namespace

std::vector<std::size_t> rank_gallery(const RetrievalEntry& probe,
                                      const std::vector<RetrievalEntry>& gallery,
                                      std::size_t stripes, Exclusion exclusion) {
  std::vector<std::size_t> order;
  std::vector<double> dist(gallery.size());
  for (std::size_t g = 0; g < gallery.size(); ++g) {
    if (excluded(probe, gallery[g], exclusion)) continue;
    dist[g] = retrieval_distance(probe.embedding, gallery[g].embedding, stripes);
    order.push_back(g);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return gallery[a].sequence_id < gallery[b].sequence_id;
  });
  return order;
}

ProbeOutcome score_probe(const RetrievalEntry& probe, const std::vector<RetrievalEntry>& gallery,
                         std::size_t stripes, Exclusion exclusion) {
  const auto order = rank_gallery(probe, gallery, stripes, exclusion);
  ProbeOutcome o;
  std::size_t hits = 0, last_hit = 0;
  double precision_sum = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (gallery[order[r]].subject != probe.subject) continue;
    ++hits;
    if (hits == 1) o.first_hit = r + 1;
    last_hit = r + 1;
    precision_sum += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  if (hits == 0) return o;
  o.valid = true;
  o.average_precision = precision_sum / static_cast<double>(hits);
  o.inverse_negative_penalty = static_cast<double>(hits) / static_cast<double>(last_hit);
  return o;
}

MetricReport evaluate(const ProbeGallerySplit& split) {
  std::unordered_set<std::string> gallery_ids;
  for (const auto& g : split.gallery) gallery_ids.insert(g.sequence_id);
  for (const auto& p : split.probes) {
    if (gallery_ids.count(p.sequence_id)) {
      throw ConfigError("evaluate: sequence '" + p.sequence_id + "' is both probe and gallery");
    }
  }
  MetricReport report;
  report.protocol = split.protocol;
  report.exclusion = split.exclusion;
  report.overall = summarize(score_all(split.probes, split.gallery, split.stripes, split.exclusion));
  if (!split.per_view) return report;

  std::set<std::string> views;
  for (const auto& p : split.probes) views.insert(p.view);
  for (const auto& g : split.gallery) views.insert(g.view);
  report.views.assign(views.begin(), views.end());
  const std::size_t nv = report.views.size();
  auto of_view = [](const std::vector<RetrievalEntry>& src, const std::string& view) {
    std::vector<RetrievalEntry> out;
    for (const auto& e : src)
      if (e.view == view) out.push_back(e);
    return out;
  };
  std::vector<double> present;
  report.view_matrix.assign(nv, std::vector<std::optional<double>>(nv));
  report.per_view_rank1.assign(nv, std::nan(""));
  for (std::size_t a = 0; a < nv; ++a) {
    const auto probes = of_view(split.probes, report.views[a]);
    if (probes.empty()) continue;
    const MetricSummary row = summarize(score_all(probes, split.gallery, split.stripes, split.exclusion));
    if (row.evaluated > 0) {
      report.per_view_rank1[a] = row.rank1;
      present.push_back(row.rank1);
    }
    for (std::size_t b = 0; b < nv; ++b) {
      if (a == b && split.exclusion == Exclusion::identical_view) continue;
      const auto gallery = of_view(split.gallery, report.views[b]);
      const MetricSummary cell = summarize(score_all(probes, gallery, split.stripes, Exclusion::none));
      if (cell.evaluated > 0) report.view_matrix[a][b] = cell.rank1;
    }
  }
  if (!present.empty()) {
    const double n = static_cast<double>(present.size());
    report.view_mean = std::accumulate(present.begin(), present.end(), 0.0) / n;
    if (present.size() > 1) {
      double ss = 0.0;
      for (double v : present) ss += (v - report.view_mean) * (v - report.view_mean);
      report.view_std = std::sqrt(ss / (n - 1.0));
    }
  }
  return report;
}

ProbeGallerySplit build_protocol(const std::vector<RetrievalEntry>& entries, std::size_t stripes,
                                 const ProtocolOptions& options) {
  ProbeGallerySplit split;
  split.stripes = stripes;
  split.protocol = options.name;
  const std::string& name = options.name;
  if (name == "gait3d-style" || name == "cross-dataset") {
    if (name == "cross-dataset") {
      if (options.train_root.empty() || options.eval_root.empty()) {
        throw ConfigError("cross-dataset protocol needs both training and evaluation dataset roots");
      }
      if (options.train_root == options.eval_root) {
        throw ConfigError("cross-dataset protocol: evaluation root equals training root '" +
                          options.train_root + "'");
      }
    }
    std::vector<std::string> subjects;
    for (const auto& e : entries)
      if (std::find(subjects.begin(), subjects.end(), e.subject) == subjects.end())
        subjects.push_back(e.subject);
    std::sort(subjects.begin(), subjects.end());
    std::mt19937_64 rng(options.seed);
    std::set<std::string> probe_ids;
    for (const auto& s : subjects) {
      std::vector<const RetrievalEntry*> mine;
      for (const auto& e : entries)
        if (e.subject == s) mine.push_back(&e);
      std::sort(mine.begin(), mine.end(),
                [](const auto* a, const auto* b) { return a->sequence_id < b->sequence_id; });
      std::uniform_int_distribution<std::size_t> pick(0, mine.size() - 1);
      probe_ids.insert(mine[pick(rng)]->sequence_id);
    }
    for (const auto& e : entries) (probe_ids.count(e.sequence_id) ? split.probes : split.gallery).push_back(e);
  } else if (name == "oumvlp-style") {
    for (const auto& e : entries) {
      if (e.sequence == options.probe_sequence) split.probes.push_back(e);
      else if (e.sequence == options.gallery_sequence) split.gallery.push_back(e);
    }
    if (split.probes.empty() || split.gallery.empty()) {
      throw ConfigError("oumvlp-style protocol needs sequences tagged '" + options.probe_sequence +
                        "' (probe) and '" + options.gallery_sequence + "' (gallery)");
    }
    split.exclusion = Exclusion::identical_view;
    split.per_view = true;
  } else if (name == "casia-style") {
    const std::set<std::string> tags(options.gallery_sequences.begin(), options.gallery_sequences.end());
    for (const auto& e : entries) (tags.count(e.sequence) ? split.gallery : split.probes).push_back(e);
    if (split.probes.empty() || split.gallery.empty()) {
      throw ConfigError("casia-style protocol: gallery tags select " + std::to_string(split.gallery.size()) +
                        " of " + std::to_string(entries.size()) + " sequences");
    }
    split.exclusion = Exclusion::identical_view;
    split.per_view = true;
  } else {
    throw ConfigError("unknown protocol '" + name +
                      "' (expected gait3d-style, oumvlp-style, casia-style or cross-dataset)");
  }
  for (const auto* side : {&split.probes, &split.gallery})
    for (const auto& e : *side)
      if (e.view.empty() && split.exclusion == Exclusion::identical_view) {
        throw ConfigError("protocol " + name + " needs a view tag on '" + e.sequence_id + "'");
      }
  return split;
}

std::string report_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["protocol"] = r.protocol;
  j["exclusion"] = exclusion_name(r.exclusion);
  const auto& o = r.overall;
  j["rank1"] = o.rank1;
  j["rank5"] = o.rank5;
  j["rank10"] = o.rank10;
  j["rank20"] = o.rank20;
  j["mAP"] = o.map;
  j["mINP"] = o.minp;
  j["probes_evaluated"] = o.evaluated;
  j["probes_dropped"] = o.dropped;
  if (!r.views.empty()) {
    nlohmann::ordered_json pv, matrix = nlohmann::ordered_json::array();
    for (std::size_t a = 0; a < r.views.size(); ++a) {
      pv[r.views[a]] = std::isnan(r.per_view_rank1[a]) ? nlohmann::ordered_json() : nlohmann::ordered_json(r.per_view_rank1[a]);
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (const auto& cell : r.view_matrix[a]) row.push_back(cell ? nlohmann::ordered_json(*cell) : nlohmann::ordered_json());
      matrix.push_back(row);
    }
    j["views"] = r.views;
    j["per_view_rank1"] = pv;
    j["view_matrix_rank1"] = matrix;
    j["view_mean"] = r.view_mean;
    j["view_std"] = r.view_std;
  }
  return j.dump(2);
}

std::string report_table(const MetricReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1);
  os << "protocol " << r.protocol << " (exclusion " << exclusion_name(r.exclusion) << ")\n";
  os << std::setw(8) << "Rank-1" << std::setw(8) << "Rank-5" << std::setw(8) << "Rank-10"
     << std::setw(8) << "Rank-20" << std::setw(8) << "mAP" << std::setw(8) << "mINP" << '\n';
  const auto& o = r.overall;
  for (double v : {o.rank1, o.rank5, o.rank10, o.rank20, o.map, o.minp}) os << std::setw(8) << 100.0 * v;
  os << "\nprobes evaluated " << o.evaluated << ", dropped " << o.dropped << '\n';
  if (!r.views.empty()) {
    os << "\nRank-1 by probe view\n" << std::setw(10) << "probe";
    for (const auto& v : r.views) os << std::setw(8) << v;
    os << std::setw(8) << "Mean" << std::setw(8) << "Std" << '\n' << std::setw(10) << "all";
    for (double v : r.per_view_rank1) {
      if (std::isnan(v)) os << std::setw(8) << "-";
      else os << std::setw(8) << 100.0 * v;
    }
    os << std::setw(8) << 100.0 * r.view_mean << std::setw(8) << 100.0 * r.view_std << '\n';
    os << "\nprobe \\ gallery\n" << std::setw(10) << "";
    for (const auto& v : r.views) os << std::setw(8) << v;
    os << '\n';
    for (std::size_t a = 0; a < r.views.size(); ++a) {
      os << std::setw(10) << r.views[a];
      for (const auto& cell : r.view_matrix[a]) {
        if (cell) os << std::setw(8) << 100.0 * *cell;
        else os << std::setw(8) << "-";
      }
      os << '\n';
    }
  }
  return os.str();
}

void write_distance_csv(std::ostream& out, const ProbeGallerySplit& split) {
  out << "probe";
  for (const auto& g : split.gallery) out << ',' << g.sequence_id;
  out << '\n' << std::setprecision(17);
  for (const auto& p : split.probes) {
    out << p.sequence_id;
    for (const auto& g : split.gallery)
      out << ',' << retrieval_distance(p.embedding, g.embedding, split.stripes);
    out << '\n';
  }
}

}  // namespace hih
