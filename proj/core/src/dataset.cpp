#include "hih/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>

#include "hih/errors.hpp"
#include "json.hpp"

namespace hih {

namespace fs = std::filesystem;

namespace {

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": malformed JSON: " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot write");
  out << text;
}

SequenceMeta parse_meta(const fs::path& path) {
  const auto j = read_json(path);
  SequenceMeta m;
  try {
    m.subject = j.at("subject").get<std::string>();
    m.sequence = j.at("sequence").get<std::string>();
    m.view = j.at("view").get<std::string>();
    m.covariate = j.at("covariate").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return m;
}

PoseSequence parse_keypoints(const fs::path& path) {
  const auto j = read_json(path);
  if (!j.is_array()) throw IoError(path.string() + ": expected an array of frames");
  PoseSequence pose;
  for (std::size_t f = 0; f < j.size(); ++f) {
    const auto& frame = j[f];
    if (!frame.is_array()) throw IoError(path.string() + ": frame " + std::to_string(f) + " is not an array");
    PoseFrame joints;
    for (const auto& kp : frame) {
      if (!kp.is_array() || kp.size() != 3 || !kp[0].is_number() || !kp[1].is_number() ||
          !kp[2].is_number()) {
        throw IoError(path.string() + ": frame " + std::to_string(f) + " has a joint that is not [x, y, confidence]");
      }
      joints.push_back({kp[0].get<double>(), kp[1].get<double>(), kp[2].get<double>()});
    }
    pose.push_back(std::move(joints));
  }
  return pose;
}

std::size_t count_frames(const fs::path& dir) {
  std::size_t n = 0;
  while (fs::exists(dir / frame_file_name(n))) ++n;
  return n;
}

std::vector<fs::path> sorted_subdirs(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory()) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string frame_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04zu.pgm", index);
  return buf;
}

std::vector<std::string> Manifest::subjects() const {
  std::set<std::string> s;
  for (const auto& r : records) s.insert(r.meta.subject);
  return {s.begin(), s.end()};
}

void write_pgm(const fs::path& path, std::size_t height, std::size_t width, const std::uint8_t* pixels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot write");
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels), static_cast<std::streamsize>(height * width));
  if (!out) throw IoError(path.string() + ": write failed");
}

std::vector<std::uint8_t> read_pgm(const fs::path& path, std::size_t& height, std::size_t& width) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open");
  auto token = [&]() {
    std::string t;
    char c;
    while (in.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        if (!t.empty()) break;
      } else {
        t.push_back(c);
      }
    }
    return t;
  };
  if (token() != "P5") throw IoError(path.string() + ": not a binary PGM (P5)");
  try {
    width = std::stoul(token());
    height = std::stoul(token());
    const unsigned long maxval = std::stoul(token());
    if (maxval == 0 || maxval > 255) throw IoError(path.string() + ": only 8-bit PGM supported");
  } catch (const std::logic_error&) {
    throw IoError(path.string() + ": malformed PGM header");
  }
  std::vector<std::uint8_t> px(height * width);
  in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (static_cast<std::size_t>(in.gcount()) != px.size()) {
    throw IoError(path.string() + ": truncated pixel data");
  }
  return px;
}

void write_sequence(const fs::path& directory, const SequenceMeta& meta, const SequenceData& data) {
  fs::create_directories(directory);
  const std::size_t plane = data.height * data.width;
  std::vector<std::uint8_t> gray(plane);
  for (std::size_t t = 0; t < data.frames; ++t) {
    for (std::size_t k = 0; k < plane; ++k) gray[k] = data.silhouettes[t * plane + k] ? 255 : 0;
    write_pgm(directory / frame_file_name(t), data.height, data.width, gray.data());
  }
  nlohmann::json kp = nlohmann::json::array();
  for (const auto& frame : data.pose) {
    nlohmann::json f = nlohmann::json::array();
    for (const auto& j : frame) f.push_back({j.x, j.y, j.confidence});
    kp.push_back(std::move(f));
  }
  write_text(directory / "keypoints.json", kp.dump() + "\n");
  nlohmann::ordered_json m;
  m["subject"] = meta.subject;
  m["sequence"] = meta.sequence;
  m["view"] = meta.view;
  m["covariate"] = meta.covariate;
  write_text(directory / "meta.json", m.dump(2) + "\n");
}

SequenceData read_sequence(const SequenceRecord& record) {
  SequenceData data;
  data.frames = record.frame_count;
  for (std::size_t t = 0; t < record.frame_count; ++t) {
    std::size_t h = 0, w = 0;
    const auto px = read_pgm(record.directory / frame_file_name(t), h, w);
    if (t == 0) {
      data.height = h;
      data.width = w;
      data.silhouettes.reserve(record.frame_count * h * w);
    } else if (h != data.height || w != data.width) {
      throw IoError((record.directory / frame_file_name(t)).string() + ": frame size " +
                    std::to_string(h) + "x" + std::to_string(w) + " differs from first frame");
    }
    for (std::uint8_t v : px) data.silhouettes.push_back(v ? 1 : 0);
  }
  data.pose = parse_keypoints(record.directory / "keypoints.json");
  if (data.pose.size() != data.frames) {
    throw IoError(record.directory.string() + ": " + std::to_string(data.frames) + " frames but " +
                  std::to_string(data.pose.size()) + " keypoint frames");
  }
  return data;
}

Manifest load_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError(root.string() + ": dataset root is not a directory");
  Manifest m;
  m.root = root;
  for (const auto& subject_dir : sorted_subdirs(root)) {
    const auto sequences = sorted_subdirs(subject_dir);
    if (sequences.empty()) {
      m.issues.push_back({subject_dir, "subject directory has no sequences"});
      continue;
    }
    for (const auto& dir : sequences) {
      try {
        if (!fs::exists(dir / "meta.json")) throw IoError((dir / "meta.json").string() + ": missing");
        if (!fs::exists(dir / "keypoints.json")) throw IoError((dir / "keypoints.json").string() + ": missing");
        SequenceRecord r;
        r.meta = parse_meta(dir / "meta.json");
        r.directory = dir;
        r.frame_count = count_frames(dir);
        if (r.frame_count == 0) throw IoError((dir / frame_file_name(0)).string() + ": missing");
        const std::size_t kp = parse_keypoints(dir / "keypoints.json").size();
        if (kp != r.frame_count) {
          throw IoError(dir.string() + ": " + std::to_string(r.frame_count) + " frames but " +
                        std::to_string(kp) + " keypoint frames");
        }
        m.records.push_back(std::move(r));
      } catch (const IoError& e) {
        m.issues.push_back({dir, e.what()});
      }
    }
  }
  return m;
}

}  // namespace hih
