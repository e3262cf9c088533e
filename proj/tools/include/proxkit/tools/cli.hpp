#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "proxkit/proxemics.hpp"
#include "proxkit/synth.hpp"

namespace proxkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitUsage = 2;

/// Settings shared by every subcommand, read from a flat `key = value` file.
///
///   smoothing_window               odd >= 3, or 0 to disable (default 3)
///   max_smoothing_iterations       default 10
///   tie_break                      closest | farthest
///   denominator                    on_grid | total
///   transitions_include_offscreen  true | false
///   scale                          path to a scale definition
///
/// Generator keys (seed, coupling, n_sessions, ...) are accepted too.
struct CliConfig {
  MetricsOptions metrics;
  std::optional<std::filesystem::path> scale_path;
  GeneratorConfig generator;

  /// Relative `scale` paths resolve against `base_dir`. Throws
  /// Error(InvalidConfig) for unknown keys or bad values.
  static CliConfig parse(std::string_view text, const std::filesystem::path& base_dir = {});
};

/// Runs one invocation. `args` excludes the program name. Returns the exit
/// status: 0 success, 1 validation or domain error, 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace proxkit::cli
