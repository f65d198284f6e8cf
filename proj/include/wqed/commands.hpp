#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wqed/config.hpp"
#include "wqed/output.hpp"

namespace wqed {

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<OutputFormat> format;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
};

struct CommandOutput {
  Table table;
  std::string x_column;
  std::vector<std::string> plot_columns;
  bool log_x = false;
  /// key=value lines reported alongside the table.
  std::vector<std::pair<std::string, std::string>> summary;
};

struct RunContext {
  std::filesystem::path base_dir;  // relative data paths resolve here
  unsigned threads = 1;
  std::uint64_t seed = 1;
};

const std::vector<std::string>& command_names();

/// Runs one subcommand against a parsed config. "run" dispatches on
/// `[scenario] kind`.
CommandOutput execute(std::string_view command, const ConfigDocument& doc, const RunContext& ctx);

/// --threads, then WQED_THREADS, then 1.
unsigned resolve_threads(std::optional<unsigned> flag);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Loads the config, executes, writes the table (stdout when no path is
/// given) and a gnuplot script next to CSV files. Returns the exit code;
/// diagnostics go to `err`.
int run_command(std::string_view command, const CommandOptions& options, std::ostream& out,
                std::ostream& err);

}  // namespace wqed
