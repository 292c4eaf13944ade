#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hih/model.hpp"
#include "hih/retrieval.hpp"

namespace hih {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Container: magic "HIHC", u32 version, u64 length + JSON text
/// {"model": <ModelConfig>, "run": <caller metadata>}, u32 entry count, then
/// per entry u32 name length, name bytes, and an HIHT tensor. Parameters
/// and buffers share the entry table.
struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::string config_json;
  ParameterList entries;
};

// `run_json` must be a JSON value; it is embedded verbatim under "run".
void save_checkpoint(const std::filesystem::path& path, const HihModel& model,
                     const std::string& run_json = "{}");
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Rebuilds the model from the embedded config and restores every tensor.
// Throws when names or shapes disagree with the reconstructed model.
HihModel load_model(const std::filesystem::path& path);
void restore(HihModel& model, const Checkpoint& checkpoint);

// One f32 block of U x D values per entry in embeddings.bin, and
// index.csv with row, sequence_id, subject, sequence, view, covariate,
// offset (in floats) and count.
void export_embeddings(const std::filesystem::path& directory,
                       const std::vector<RetrievalEntry>& entries);
std::vector<RetrievalEntry> import_embeddings(const std::filesystem::path& directory);

}  // namespace hih
