#include <fstream>

#include <json.hpp>

#include "frost/ensemble.hpp"
#include "frost/error.hpp"

namespace frost {

namespace {

constexpr int kManifestVersion = 1;

nlohmann::json triple_json(const DistanceTriple& t) { return nlohmann::json::array({t.geo, t.dem, t.ndvi}); }

DistanceTriple triple_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("bank manifest distance triple must have 3 entries");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

void save_bank(const SubmodelBank& bank, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json stations = nlohmann::json::array();
  for (const auto& [id, sub] : bank.submodels) {
    const std::string file = "submodel_" + id.str() + ".json";
    save_model(sub.model, dir / file);
    stations.push_back({{"id", id.str()},
                        {"lon", sub.attrs.location.lon},
                        {"lat", sub.attrs.location.lat},
                        {"dem", sub.attrs.dem},
                        {"ndvi", sub.attrs.ndvi},
                        {"model", file}});
  }
  nlohmann::json baselines = nlohmann::json::array();
  for (const auto& [id, model] : bank.baselines) {
    const std::string file = "baseline_" + id.str() + ".json";
    save_model(model, dir / file);
    baselines.push_back({{"id", id.str()}, {"model", file}});
  }
  nlohmann::json tests = nlohmann::json::array();
  for (const auto& id : bank.test_stations) tests.push_back(id.str());

  const nlohmann::json manifest{
      {"version", kManifestVersion},
      {"fold", bank.fold},
      {"stations", stations},
      {"test_stations", tests},
      {"baselines", baselines},
      {"coefficients", {{"a", bank.coefficients.a}, {"b", bank.coefficients.b}, {"c", bank.coefficients.c}}},
      {"normalizer", {{"min", triple_json(bank.normalizer.min)}, {"max", triple_json(bank.normalizer.max)}}},
  };
  std::ofstream out(dir / "manifest.json");
  if (!out) throw DataError("cannot write bank manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

SubmodelBank load_bank(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw DataError("no bank manifest in " + dir.string());
  SubmodelBank bank;
  try {
    const auto manifest = nlohmann::json::parse(in);
    const auto version = manifest.at("version").get<int>();
    if (version != kManifestVersion)
      throw UnsupportedVersionError("unsupported bank manifest version " + std::to_string(version));
    bank.fold = manifest.at("fold").get<std::size_t>();
    for (const auto& s : manifest.at("stations")) {
      StationAttributes attrs{{s.at("lon").get<double>(), s.at("lat").get<double>()},
                              s.at("dem").get<double>(),
                              s.at("ndvi").get<double>()};
      bank.submodels.emplace(StationId(s.at("id").get<std::string>()),
                             Submodel{load_model(dir / s.at("model").get<std::string>()), attrs});
    }
    for (const auto& t : manifest.at("test_stations")) bank.test_stations.emplace_back(t.get<std::string>());
    for (const auto& b : manifest.at("baselines")) {
      bank.baselines.emplace(StationId(b.at("id").get<std::string>()),
                             load_model(dir / b.at("model").get<std::string>()));
    }
    const auto& c = manifest.at("coefficients");
    bank.coefficients = {c.at("a").get<double>(), c.at("b").get<double>(), c.at("c").get<double>()};
    bank.normalizer = {triple_from(manifest.at("normalizer").at("min")),
                       triple_from(manifest.at("normalizer").at("max"))};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bank manifest: ") + e.what());
  }
  if (!bank.coefficients.valid()) throw FormatError("bank manifest coefficients are invalid");
  return bank;
}

}  // namespace frost
