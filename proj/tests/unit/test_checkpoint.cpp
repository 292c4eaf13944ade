#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "hih/checkpoint.hpp"
#include "hih/errors.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace hih;

namespace {

std::vector<Tensor> inputs(std::mt19937_64& rng) {
  return {fixtures::random_tensor({1, 6, 32, 16}, rng, 0, 1), fixtures::random_tensor({1, 6, 32, 16}, rng, 0, 1)};
}

}  // namespace

TEST_CASE("checkpoint roundtrip restores parameters and buffers") {
  fixtures::TempDir dir("ckpt");
  HihModel m(fixtures::small_model(3));
  m.init(4);
  std::mt19937_64 rng(1);
  const auto sils = inputs(rng), poses = inputs(rng);
  m.forward(sils, poses, true);  // moves the BN running statistics
  save_checkpoint(dir / "m.hihc", m, R"({"iteration": 12})");

  const Checkpoint c = read_checkpoint(dir / "m.hihc");
  CHECK(c.version == kCheckpointVersion);
  const auto meta = nlohmann::json::parse(c.config_json);
  CHECK(meta["run"]["iteration"] == 12);
  CHECK(c.entries.size() == m.parameters().size() + m.buffers().size());

  HihModel back = load_model(dir / "m.hihc");
  CHECK(back.config().to_json() == m.config().to_json());
  CHECK(back.parameter_count() == m.parameter_count());
  const auto a = m.parameters(), b = back.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == b[i].name);
    CHECK(oracle::values(a[i].tensor) == oracle::values(b[i].tensor));
  }
  CHECK(back.bnneck().running_mean == m.bnneck().running_mean);
  CHECK(back.bnneck().running_var == m.bnneck().running_var);
  NoGradGuard guard;
  CHECK(oracle::values(back.forward(sils, poses, false).embedding) ==
        oracle::values(m.forward(sils, poses, false).embedding));
}

TEST_CASE("checkpoint errors") {
  fixtures::TempDir dir("ckpt_err");
  HihModel m(fixtures::small_model(3));
  m.init(1);
  save_checkpoint(dir / "m.hihc", m);
  CHECK_THROWS_AS(save_checkpoint(dir / "x.hihc", m, "not json"), ConfigError);
  CHECK_THROWS_AS(read_checkpoint(dir / "missing.hihc"), IoError);
  std::ofstream(dir / "junk.hihc") << "JUNKJUNKJUNK";
  CHECK_THROWS_AS(read_checkpoint(dir / "junk.hihc"), IoError);

  // Truncation anywhere past the header is an I/O error.
  const std::string bytes = fixtures::read_text(dir / "m.hihc");
  std::ofstream(dir / "cut.hihc", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
  CHECK_THROWS_AS(read_checkpoint(dir / "cut.hihc"), IoError);

  // A model with different widths rejects the tensors by shape.
  ModelConfig wide = fixtures::small_model(3);
  wide.channels = {2, 4, 4, 16};
  HihModel other(wide);
  CHECK_THROWS_AS(restore(other, read_checkpoint(dir / "m.hihc")), DimensionError);
  // HiH-S lacks the guidance convs, so a HiH-S checkpoint cannot fill HiH-M.
  ModelConfig s = fixtures::small_model(3);
  s.mode = ModelMode::silhouette_only;
  HihModel sil(s);
  save_checkpoint(dir / "s.hihc", sil);
  CHECK_THROWS_AS(restore(m, read_checkpoint(dir / "s.hihc")), ConfigError);
}

TEST_CASE("embedding export roundtrip") {
  fixtures::TempDir dir("emb");
  std::mt19937_64 rng(2);
  std::vector<RetrievalEntry> entries;
  for (int i = 0; i < 5; ++i)
    entries.push_back({"s" + std::to_string(i) + "/nm-01", "s" + std::to_string(i), "nm-01", "090", "nm",
                       oracle::uniform(8, rng)});
  entries[2].embedding.resize(4);
  export_embeddings(dir.path(), entries);
  const auto back = import_embeddings(dir.path());
  REQUIRE(back.size() == entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    CHECK(back[i].sequence_id == entries[i].sequence_id);
    CHECK(back[i].subject == entries[i].subject);
    CHECK(back[i].view == entries[i].view);
    CHECK(back[i].covariate == entries[i].covariate);
    REQUIRE(back[i].embedding.size() == entries[i].embedding.size());
    for (std::size_t k = 0; k < entries[i].embedding.size(); ++k)
      CHECK(back[i].embedding[k] == static_cast<double>(static_cast<float>(entries[i].embedding[k])));
  }
  const std::string csv = fixtures::read_text(dir / "index.csv");
  CHECK(csv.starts_with("row,sequence_id,subject,sequence,view,covariate,offset,count\n"));
  CHECK(csv.find("3,s3/nm-01,s3,nm-01,090,nm,20,8\n") != std::string::npos);

  std::vector<RetrievalEntry> bad{{"a,b", "a", "nm-01", "000", "nm", {0.0}}};
  CHECK_THROWS_AS(export_embeddings(dir / "bad", bad), IoError);
  CHECK_THROWS_AS(import_embeddings(dir / "none"), IoError);
}
