#include "run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "hih/errors.hpp"
#include "json.hpp"

namespace hih::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Reads the fields of one JSON object and rejects any key left unread.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) throw ConfigError(path_ + "." + key + ": unknown key");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }
  std::string path(const char* key) const { return path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

fs::path resolve(const fs::path& base, const fs::path& p) {
  if (p.empty() || p.is_absolute()) return p;
  return (base / p).lexically_normal();
}

bool parse_switch(const std::string& key, const std::string& value) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw ConfigError("ablation " + key + ": expected on/off, got '" + value + "'");
}

void check_positive(std::size_t v, const char* name) {
  if (v == 0) throw ConfigError(std::string(name) + " must be >= 1");
}

}  // namespace

ModelConfig RunConfig::effective_model(std::size_t num_classes) const {
  ModelConfig m = model;
  m.num_classes = num_classes;
  m.hgd_width = ablation.hgd_width;
  if (!ablation.dse) m.dse_stages.clear();
  if (!ablation.dta) m.dta_stages.clear();
  m.validate();
  return m;
}

std::string RunConfig::variant_label() const {
  std::string label = mode_name(model.mode);
  label += ablation.hgd_width ? "_width-on" : "_width-off";
  if (model.mode == ModelMode::multi_modal) {
    label += ablation.dse ? "_dse-on" : "_dse-off";
    label += ablation.dta ? "_dta-on" : "_dta-off";
  }
  return label;
}

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  c.source_text = text;
  std::string output_dir = c.output_dir.string(), dataset_root = c.dataset_root.string(), eval_root;
  {
    Section top(root, "config");
    top.get("seed", c.seed);
    top.get("output_dir", output_dir);
    if (const json* d = top.child("dataset")) {
      Section s(*d, top.path("dataset"));
      s.get("root", dataset_root);
      s.get("eval_root", eval_root);
    }
    if (const json* d = top.child("synth")) {
      Section s(*d, top.path("synth"));
      s.get("subjects", c.synth.subjects);
      s.get("sequences", c.synth.sequences);
      s.get("views", c.synth.views);
      s.get("frames", c.synth.frames);
      s.get("identity", c.synth.identity);
      s.get("sequence_jitter", c.synth.sequence_jitter);
    }
    if (const json* d = top.child("model")) {
      Section s(*d, top.path("model"));
      std::string mode = mode_name(c.model.mode);
      std::vector<std::size_t> dse(c.model.dse_stages.begin(), c.model.dse_stages.end());
      std::vector<std::size_t> dta(c.model.dta_stages.begin(), c.model.dta_stages.end());
      s.get("channels", c.model.channels);
      s.get("spatial_downsample", c.model.spatial_downsample);
      s.get("temporal_stride", c.model.temporal_stride);
      s.get("dse_stages", dse);
      s.get("dta_stages", dta);
      s.get("hp_bins", c.model.hp_bins);
      s.get("embedding_dim", c.model.embedding_dim);
      s.get("bias", c.model.bias);
      s.get("input_height", c.model.input_height);
      s.get("input_width", c.model.input_width);
      s.get("mode", mode);
      c.model.mode = parse_mode(mode);
      c.model.dse_stages = {dse.begin(), dse.end()};
      c.model.dta_stages = {dta.begin(), dta.end()};
    }
    if (const json* d = top.child("ablation")) {
      Section s(*d, top.path("ablation"));
      s.get("hgd_width", c.ablation.hgd_width);
      s.get("dse", c.ablation.dse);
      s.get("dta", c.ablation.dta);
    }
    if (const json* d = top.child("train")) {
      Section s(*d, top.path("train"));
      s.get("iterations", c.train.iterations);
      s.get("p", c.train.plan.p);
      s.get("k", c.train.plan.k);
      s.get("min_frames", c.train.plan.frames.min_frames);
      s.get("max_frames", c.train.plan.frames.max_frames);
      s.get("lr", c.train.lr);
      s.get("margin", c.train.margin);
      s.get("sequences", c.train.sequences);
      s.get("eval_every", c.train.eval_every);
      s.get("checkpoint_every", c.train.checkpoint_every);
      s.get("log_wall_time", c.train.log_wall_time);
      s.get("hflip_probability", c.train.hflip_probability);
      s.get("rotate_degrees", c.train.rotate_degrees);
      s.get("grad_clip", c.train.grad_clip);
    }
    if (const json* d = top.child("eval")) {
      Section s(*d, top.path("eval"));
      s.get("protocol", c.eval.protocol);
      s.get("sequences", c.eval.sequences);
      s.get("max_frames", c.eval.max_frames);
      s.get("dump_distances", c.eval.dump_distances);
      s.get("probe_sequence", c.eval.options.probe_sequence);
      s.get("gallery_sequence", c.eval.options.gallery_sequence);
      s.get("gallery_sequences", c.eval.options.gallery_sequences);
    }
    if (const json* d = top.child("gradcheck")) {
      Section s(*d, top.path("gradcheck"));
      s.get("seeds", c.gradcheck.seeds);
      s.get("op_tolerance", c.gradcheck.op_tolerance);
      s.get("model_tolerance", c.gradcheck.model_tolerance);
      s.get("corrupt", c.gradcheck.corrupt);
    }
    if (const json* d = top.child("dump_maps")) {
      Section s(*d, top.path("dump_maps"));
      s.get("sequence", c.dump_maps.sequence);
      s.get("frames", c.dump_maps.frames);
    }
    if (const json* d = top.child("ablate")) {
      Section s(*d, top.path("ablate"));
      s.get("iterations", c.ablate.iterations);
    }
  }
  c.output_dir = resolve(base_dir, output_dir);
  c.dataset_root = resolve(base_dir, dataset_root);
  c.eval_root = resolve(base_dir, eval_root);
  c.eval.options.name = c.eval.protocol;
  c.eval.options.seed = c.seed;

  check_positive(c.synth.subjects, "synth.subjects");
  check_positive(c.synth.frames, "synth.frames");
  if (c.synth.sequences.empty() || c.synth.views.empty()) {
    throw ConfigError("synth.sequences and synth.views must be non-empty");
  }
  if (!(c.synth.sequence_jitter >= 0.0 && c.synth.sequence_jitter < 0.5)) {
    throw ConfigError("synth.sequence_jitter must be in [0, 0.5)");
  }
  c.train.plan.validate();
  if (!(c.train.lr > 0.0)) throw ConfigError("train.lr must be positive");
  if (!(c.train.margin >= 0.0)) throw ConfigError("train.margin must be >= 0");
  if (!(c.train.hflip_probability >= 0.0 && c.train.hflip_probability <= 1.0)) {
    throw ConfigError("train.hflip_probability must be in [0, 1]");
  }
  if (!(c.train.grad_clip >= 0.0)) throw ConfigError("train.grad_clip must be >= 0");
  if (!(c.train.rotate_degrees >= 0.0 && c.train.rotate_degrees <= 15.0)) {
    throw ConfigError("train.rotate_degrees must be in [0, 15]");
  }
  check_positive(c.gradcheck.seeds, "gradcheck.seeds");
  // Class count is only known once the dataset is read.
  c.effective_model(2);
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot read config");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), fs::absolute(path).parent_path());
}

void apply_ablation_overrides(RunConfig& config, const std::string& spec) {
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("ablation override '" + item + "' is not key=value");
    const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    if (key == "hgd_width" || key == "width") config.ablation.hgd_width = parse_switch(key, value);
    else if (key == "dse") config.ablation.dse = parse_switch(key, value);
    else if (key == "dta") config.ablation.dta = parse_switch(key, value);
    else if (key == "mode") config.model.mode = parse_mode(value);
    else throw ConfigError("unknown ablation switch '" + key + "' (hgd_width, dse, dta, mode)");
  }
  config.effective_model(2);
}

}  // namespace hih::cli
