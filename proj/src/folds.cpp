#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "frost/error.hpp"
#include "frost/evaluate.hpp"
#include "frost/random.hpp"

namespace frost {

FoldAssignment make_folds(std::vector<StationId> stations, std::uint64_t seed) {
  if (stations.size() < kFoldCount) {
    throw DataError("five folds need at least 5 stations, got " + std::to_string(stations.size()));
  }
  std::sort(stations.begin(), stations.end());
  if (std::adjacent_find(stations.begin(), stations.end()) != stations.end()) {
    throw DataError("duplicate station id in fold input");
  }
  Rng rng(seed);
  rng.shuffle(std::span<StationId>(stations));
  FoldAssignment out;
  for (std::size_t i = 0; i < stations.size(); ++i) out.folds[i % kFoldCount].push_back(stations[i]);
  for (auto& f : out.folds) std::sort(f.begin(), f.end());
  return out;
}

void save_folds(const FoldAssignment& folds, std::uint64_t seed, std::ostream& out) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : folds.folds) {
    nlohmann::json ids = nlohmann::json::array();
    for (const auto& id : f) ids.push_back(id.str());
    arr.push_back(ids);
  }
  out << nlohmann::json{{"seed", seed}, {"folds", arr}}.dump(2) << '\n';
}

void save_folds(const FoldAssignment& folds, std::uint64_t seed, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  save_folds(folds, seed, out);
}

FoldAssignment load_folds(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  FoldAssignment out;
  try {
    const auto j = nlohmann::json::parse(in);
    const auto& arr = j.at("folds");
    if (!arr.is_array() || arr.size() != kFoldCount) throw FormatError("folds file must list exactly 5 folds");
    for (std::size_t k = 0; k < kFoldCount; ++k) {
      for (const auto& id : arr[k]) out.folds[k].emplace_back(id.get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("folds file: ") + e.what());
  }
  const auto all = out.all_stations();
  if (!out.partitions(all)) throw FormatError("folds file lists a station more than once");
  return out;
}

}  // namespace frost
