#include "treemax/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace treemax {

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::stod(s);
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void save_sample_set(const SampleSet& set, const std::filesystem::path& stem) {
  const auto csv = with_suffix(stem, ".csv");
  std::ofstream out(csv);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + csv.string());
  out << (set.paired_values ? "max,linear\n" : "value\n");
  for (std::size_t i = 0; i < set.values.size(); ++i) {
    out << format_double(set.values[i]);
    if (set.paired_values) out << ',' << format_double((*set.paired_values)[i]);
    out << '\n';
  }

  nlohmann::ordered_json meta;
  meta["seed"] = set.seed;
  meta["depth"] = set.depth;
  meta["replicas"] = set.replica_count;
  meta["mode"] = to_string(set.mode);
  meta["iterated"] = set.iterated;
  meta["log_domain"] = set.log_domain;
  if (set.trunc_bound) {
    const TruncationBound& b = *set.trunc_bound;
    meta["trunc_bound"] = {{"beta", b.beta},       {"rho_beta", b.rho_beta}, {"moment", b.moment},
                           {"epsilon", b.epsilon}, {"depth", b.depth},       {"bound", b.bound}};
  } else {
    meta["trunc_bound"] = nullptr;
  }
  std::ofstream side(with_suffix(stem, ".meta.json"));
  side << meta.dump(2) << '\n';
}

SampleSet load_sample_set(const std::filesystem::path& stem) {
  const auto csv = with_suffix(stem, ".csv");
  const auto meta_path = with_suffix(stem, ".meta.json");
  if (!std::filesystem::exists(csv) || !std::filesystem::exists(meta_path)) {
    throw Error(ErrorCode::MissingArtifacts, "missing " + csv.string() + " or its sidecar");
  }
  SampleSet set;
  std::ifstream side(meta_path);
  const nlohmann::json meta = nlohmann::json::parse(side);
  set.seed = meta.at("seed").get<std::uint64_t>();
  set.depth = meta.at("depth").get<std::uint32_t>();
  set.replica_count = meta.at("replicas").get<std::size_t>();
  set.mode = functional_from_string(meta.at("mode").get<std::string>());
  set.iterated = meta.value("iterated", false);
  set.log_domain = meta.value("log_domain", false);
  if (meta.contains("trunc_bound") && !meta["trunc_bound"].is_null()) {
    const auto& b = meta["trunc_bound"];
    set.trunc_bound = TruncationBound{b.at("beta"), b.at("rho_beta"), b.at("moment"),
                                      b.at("epsilon"), b.at("depth"), b.at("bound")};
  }

  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  const bool paired = line == "max,linear";
  if (paired) set.paired_values.emplace();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    set.values.push_back(parse_double(line.substr(0, comma)));
    if (paired) set.paired_values->push_back(parse_double(line.substr(comma + 1)));
  }
  return set;
}

}  // namespace treemax
