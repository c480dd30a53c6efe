// Experiment orchestration behind the command line: resolves a validated
// configuration into one of the six experiment modes and writes its CSV
// series, text summary and optional SVG charts.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "polyattr/config.hpp"

namespace polyattr::runner {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitNumericalFailure = 2;

struct RunOptions {
  std::string mode;  // one of config::known_modes()
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;
};

/// Output directory precedence: --out flag, then $POLYATTR_OUT, then the
/// config's out.dir, then "./out".
std::filesystem::path resolve_out_dir(const config::Config& cfg,
                                      const RunOptions& opts);

/// Validates and dispatches; returns the process exit status and reports
/// errors on stderr.  Artifact files land in the resolved output directory.
int run(const config::Config& cfg, const RunOptions& opts);

}  // namespace polyattr::runner
