#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "treemax/io.hpp"

using namespace treemax;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "treemax_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Io, RoundTripIsBitExact) {
  SampleSet set;
  set.values = {1.0, 0.1, 1.0 / 3.0, 1e-300, 12345.678901234567, -2.5};
  set.paired_values = std::vector<double>{2.0, 0.2, 2.0 / 3.0, 1e-299, 99999.0, 7.0};
  set.seed = 987654321987654321ULL;
  set.depth = 17;
  set.replica_count = 6;
  set.mode = Functional::both_coupled;
  set.trunc_bound = TruncationBound{0.75, 32.0 / 35.0, 1.0, 1.0, 17, 0.2};
  const fs::path stem = scratch("roundtrip");
  save_sample_set(set, stem);
  const SampleSet back = load_sample_set(stem);
  EXPECT_EQ(back.values, set.values);
  ASSERT_TRUE(back.paired_values.has_value());
  EXPECT_EQ(*back.paired_values, *set.paired_values);
  EXPECT_EQ(back.seed, set.seed);
  EXPECT_EQ(back.depth, set.depth);
  EXPECT_EQ(back.replica_count, set.replica_count);
  EXPECT_EQ(back.mode, set.mode);
  ASSERT_TRUE(back.trunc_bound.has_value());
  EXPECT_EQ(back.trunc_bound->rho_beta, 32.0 / 35.0);
  EXPECT_EQ(back.trunc_bound->depth, 17u);
}

TEST(Io, LogDomainFlagSurvives) {
  SampleSet set;
  set.values = {1.0, 2.0};
  set.replica_count = 2;
  set.log_domain = true;
  set.iterated = true;
  const fs::path stem = scratch("flags");
  save_sample_set(set, stem);
  const SampleSet back = load_sample_set(stem);
  EXPECT_TRUE(back.log_domain);
  EXPECT_TRUE(back.iterated);
  EXPECT_FALSE(back.paired_values.has_value());
}

TEST(Io, MissingFilesAreReported) {
  try {
    load_sample_set(scratch("absent"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingArtifacts);
  }
}

TEST(Io, FormatRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 2.0, 5e-300, 6.02214076e23}) {
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
}
