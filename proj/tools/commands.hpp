// Subcommands of the meanfield command-line tool, callable in-process.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "meanfield/io.hpp"

namespace meanfield::cli {

struct GlobalFlags {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

struct InvertFlags {
  std::optional<std::string> samples;
  std::optional<std::string> ball;  ///< "c_1,...,c_n,radius"
};

struct CommandOutput {
  std::string primary;                  ///< written to --out or stdout
  std::optional<std::string> secondary; ///< CSV companion, written next to --out
};

CommandOutput cmd_solve(const io::Json& config, const GlobalFlags& flags);
CommandOutput cmd_pressure(const io::Json& config, const GlobalFlags& flags);
CommandOutput cmd_sample(const io::Json& config, const GlobalFlags& flags);
CommandOutput cmd_limits(const io::Json& config, const GlobalFlags& flags);
CommandOutput cmd_invert(const io::Json& config, const GlobalFlags& flags, const InvertFlags& inv);
CommandOutput cmd_phase(const io::Json& config, const GlobalFlags& flags);

/// Full command line handling; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace meanfield::cli
