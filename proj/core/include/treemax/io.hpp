#pragma once

#include <filesystem>
#include <string>

#include "treemax/simulate.hpp"

namespace treemax {

/// Writes `<stem>.csv` (one value, or a max,linear pair, per row, printed
/// with 17 significant digits) and `<stem>.meta.json` (seed, depth, replicas,
/// mode, truncation bound).
void save_sample_set(const SampleSet& set, const std::filesystem::path& stem);

/// Inverse of save_sample_set. Throws MissingArtifacts when a file is absent.
SampleSet load_sample_set(const std::filesystem::path& stem);

/// Shortest round-trip formatting used in every delimited file.
std::string format_double(double x);

}  // namespace treemax
