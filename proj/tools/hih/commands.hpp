#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "run_config.hpp"

namespace hih::cli {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

struct CommandOptions {
  bool force = false;
  std::filesystem::path checkpoint;  // empty: <output_dir>/checkpoint.hihc
  std::string protocol;              // empty: eval.protocol
};

int cmd_synth(const RunConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_train(const RunConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_eval(const RunConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_gradcheck(const RunConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_dump_maps(const RunConfig& config, const CommandOptions& options, std::ostream& out);
// Trains and evaluates every ablation row, then writes a comparative report.
int cmd_ablate(const RunConfig& config, const CommandOptions& options, std::ostream& out);

// Parses argv, dispatches, and maps exceptions to exit codes.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace hih::cli
