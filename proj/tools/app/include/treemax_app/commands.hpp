#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "treemax/error.hpp"

namespace treemax::app {

enum ExitCode : int { kOk = 0, kConfigError = 1, kRejected = 2, kStageFailure = 3 };

int exit_code_for(ErrorCode code);

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> parallelism;
  std::optional<std::string> out;
};

/// validate: model checks plus root-equation precursors. Exit 0 iff every
/// check passes.
int cmd_validate(const std::filesystem::path& config, const Overrides& overrides, std::ostream& out,
                 std::ostream& err);

/// One of solve-root, simulate, tail, constant, certify, symmetry-check,
/// pipeline. Writes summary.json and the tables of the stages it runs into
/// the output directory; a failing stage leaves a FAILED marker.
int cmd_run(const std::string& command, const std::filesystem::path& config, const Overrides& overrides,
            std::ostream& out, std::ostream& err);

/// Renders report.txt from a results directory.
int cmd_report(const std::filesystem::path& results_dir, std::ostream& out, std::ostream& err);

}  // namespace treemax::app
