#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hih/walker.hpp"

namespace hih {

struct SequenceMeta {
  std::string subject;
  std::string sequence;   // e.g. "nm-01"
  std::string view;       // e.g. "090"
  std::string covariate;  // e.g. "nm"
};

struct SequenceRecord {
  SequenceMeta meta;
  std::filesystem::path directory;
  std::size_t frame_count = 0;

  // Unique within a dataset: subject plus sequence directory name.
  std::string id() const { return meta.subject + "/" + directory.filename().string(); }
};

struct LoadIssue {
  std::filesystem::path path;
  std::string message;
};

// Valid sequences in root/<subject>/<sequence>/ order, plus one issue per
// rejected sequence or empty subject directory.
struct Manifest {
  std::filesystem::path root;
  std::vector<SequenceRecord> records;
  std::vector<LoadIssue> issues;

  std::vector<std::string> subjects() const;  // sorted, unique
};

/// Reads root/<subject>/<sequence>/{frame_%04d.pgm, keypoints.json,
/// meta.json}. Per-sequence problems (missing files, malformed JSON, frame
/// and keypoint counts that disagree) reject that sequence and are listed in
/// the manifest; a missing root throws IoError.
Manifest load_dataset(const std::filesystem::path& root);

// Binary P5, 8-bit. Silhouette frames are written as 0 / 255.
void write_pgm(const std::filesystem::path& path, std::size_t height, std::size_t width,
               const std::uint8_t* pixels);
std::vector<std::uint8_t> read_pgm(const std::filesystem::path& path, std::size_t& height,
                                   std::size_t& width);

void write_sequence(const std::filesystem::path& directory, const SequenceMeta& meta,
                    const SequenceData& data);
// Frames decode to 0/1 (any nonzero gray level is foreground).
SequenceData read_sequence(const SequenceRecord& record);

std::string frame_file_name(std::size_t index);

}  // namespace hih
