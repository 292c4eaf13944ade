#include "hih/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "hih/errors.hpp"
#include "hih/serialize.hpp"
#include "json.hpp"

namespace hih {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'H', 'I', 'H', 'C'};

void write_string(std::ostream& out, const std::string& s, bool wide) {
  if (wide) write_u64(out, s.size());
  else write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in, bool wide) {
  const std::uint64_t n = wide ? read_u64(in) : read_u32(in);
  if (n > (1ULL << 32)) throw IoError("checkpoint: implausible string length");
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw IoError("checkpoint: truncated string");
  return s;
}

// CSV fields here are identifiers; reject separators rather than quoting.
const std::string& csv_safe(const std::string& s) {
  if (s.find_first_of(",\n\"") != std::string::npos) {
    throw IoError("embedding export: field '" + s + "' contains a CSV separator");
  }
  return s;
}

}  // namespace

void save_checkpoint(const fs::path& path, const HihModel& model, const std::string& run_json) {
  nlohmann::ordered_json cfg;
  cfg["model"] = nlohmann::ordered_json::parse(model.config().to_json());
  try {
    cfg["run"] = nlohmann::ordered_json::parse(run_json);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint run metadata: ") + e.what());
  }
  ParameterList entries = model.parameters();
  for (auto& b : model.buffers()) entries.push_back(std::move(b));

  // Write to a sibling and rename, so an interrupted save keeps the old file.
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError(tmp.string() + ": cannot write");
    out.write(kMagic, 4);
    write_u32(out, kCheckpointVersion);
    write_string(out, cfg.dump(), true);
    write_u32(out, static_cast<std::uint32_t>(entries.size()));
    for (const auto& [name, t] : entries) {
      write_string(out, name, false);
      write_tensor(out, t);
    }
    if (!out) throw IoError(tmp.string() + ": write failed");
  }
  fs::rename(tmp, path);
}

Checkpoint read_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open checkpoint");
  char magic[4];
  in.read(magic, 4);
  if (!in || !std::equal(magic, magic + 4, kMagic)) throw IoError(path.string() + ": not an HIHC checkpoint");
  Checkpoint c;
  try {
    c.version = read_u32(in);
    if (c.version != kCheckpointVersion) {
      throw IoError("unsupported checkpoint version " + std::to_string(c.version));
    }
    c.config_json = read_string(in, true);
    const std::uint32_t n = read_u32(in);
    for (std::uint32_t i = 0; i < n; ++i) {
      std::string name = read_string(in, false);
      c.entries.push_back({std::move(name), read_tensor(in)});
    }
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return c;
}

void restore(HihModel& model, const Checkpoint& checkpoint) {
  ParameterList buffers;
  const ParameterList params = model.parameters();
  std::size_t matched = 0;
  for (const auto& [name, t] : checkpoint.entries) {
    auto it = std::find_if(params.begin(), params.end(), [&](const NamedTensor& p) { return p.name == name; });
    if (it == params.end()) {
      buffers.push_back({name, t});
      continue;
    }
    if (it->tensor.shape() != t.shape()) {
      throw DimensionError("checkpoint tensor '" + name + "' has shape " + shape_str(t.shape()) +
                           ", model expects " + shape_str(it->tensor.shape()));
    }
    Tensor dst = it->tensor;
    auto src = t.data();
    std::copy(src.begin(), src.end(), dst.mutable_data().begin());
    ++matched;
  }
  if (matched != params.size()) {
    throw ConfigError("checkpoint holds " + std::to_string(matched) + " of " +
                      std::to_string(params.size()) + " model parameters");
  }
  model.load_buffers(buffers);
}

HihModel load_model(const fs::path& path) {
  const Checkpoint c = read_checkpoint(path);
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(c.config_json);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": config JSON: " + e.what());
  }
  if (!cfg.contains("model")) throw IoError(path.string() + ": config JSON lacks \"model\"");
  HihModel model(ModelConfig::from_json(cfg["model"].dump()));
  restore(model, c);
  return model;
}

void export_embeddings(const fs::path& directory, const std::vector<RetrievalEntry>& entries) {
  fs::create_directories(directory);
  std::ofstream bin(directory / "embeddings.bin", std::ios::binary);
  std::ofstream csv(directory / "index.csv");
  if (!bin || !csv) throw IoError(directory.string() + ": cannot write embedding export");
  csv << "row,sequence_id,subject,sequence,view,covariate,offset,count\n";
  std::size_t offset = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    for (double v : e.embedding) write_f32(bin, static_cast<float>(v));
    csv << i << ',' << csv_safe(e.sequence_id) << ',' << csv_safe(e.subject) << ','
        << csv_safe(e.sequence) << ',' << csv_safe(e.view) << ',' << csv_safe(e.covariate) << ','
        << offset << ',' << e.embedding.size() << '\n';
    offset += e.embedding.size();
  }
  if (!bin || !csv) throw IoError(directory.string() + ": embedding export write failed");
}

std::vector<RetrievalEntry> import_embeddings(const fs::path& directory) {
  std::ifstream bin(directory / "embeddings.bin", std::ios::binary);
  std::ifstream csv(directory / "index.csv");
  if (!bin || !csv) throw IoError(directory.string() + ": missing embeddings.bin or index.csv");
  std::string line;
  std::getline(csv, line);
  std::vector<RetrievalEntry> out;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8) throw IoError(directory.string() + "/index.csv: malformed row '" + line + "'");
    RetrievalEntry e{f[1], f[2], f[3], f[4], f[5], {}};
    const std::size_t count = std::stoul(f[7]);
    bin.seekg(static_cast<std::streamoff>(std::stoul(f[6]) * sizeof(float)));
    e.embedding.resize(count);
    for (auto& v : e.embedding) v = read_f32(bin);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace hih
