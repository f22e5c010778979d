#include "frost/raster.hpp"

#include <algorithm>
#include <cmath>

#include "frost/error.hpp"

namespace frost {

RasterRequest parse_raster_method(const std::string& token) {
  RasterRequest r;
  if (token == "avg" || token == "average") {
    r.method = RasterMethod::average;
  } else if (token == "wavg" || token == "weighted_average") {
    r.method = RasterMethod::weighted;
  } else if (token.rfind("single:", 0) == 0 && token.size() > 7) {
    r.method = RasterMethod::single;
    r.station = StationId(token.substr(7));
  } else {
    throw UsageError("unknown raster method '" + token + "' (expected avg, wavg or single:<id>)");
  }
  return r;
}

ClimateSnapshot climate_snapshot(const Dataset& data, const SubmodelBank& bank, std::int64_t timestamp) {
  ClimateSnapshot out;
  for (const auto& [id, sub] : bank.submodels) {
    const auto* s = data.find(id);
    if (!s) continue;
    auto it = std::lower_bound(s->observations.begin(), s->observations.end(), timestamp,
                               [](const ClimateObservation& o, std::int64_t t) { return o.timestamp < t; });
    if (it != s->observations.end() && it->timestamp == timestamp) out.emplace(id, climate_features(*it));
  }
  if (out.empty()) throw DataError("no bank station has an observation at timestamp " + std::to_string(timestamp));
  return out;
}

AttributeGrid generate_raster(const SubmodelBank& bank, const ClimateSnapshot& climate, const AttributeGrid& dem,
                              const AttributeGrid& ndvi, const RasterRequest& request) {
  dem.check();
  ndvi.check();
  if (!dem.same_geometry(ndvi)) throw DataError("DEM and NDVI grids differ in geometry");

  struct Source {
    const Submodel* sub;
    ClimateVector climate;
    double fixed_weight;
  };
  std::vector<Source> sources;
  if (request.method == RasterMethod::single) {
    if (!request.station) throw UsageError("single-station raster needs a station id");
    auto it = climate.find(*request.station);
    if (it == climate.end()) throw DataError("no climate for station " + request.station->str());
    sources.push_back({&bank.at(*request.station), it->second, 1.0});
  } else {
    for (const auto& [id, c] : climate) {
      double w = 1.0;
      if (request.fixed_weights) {
        auto wit = request.fixed_weights->find(id);
        if (wit == request.fixed_weights->end()) throw DataError("no fixed weight for station " + id.str());
        w = wit->second;
      }
      sources.push_back({&bank.at(id), c, w});
    }
  }
  if (sources.empty()) throw DataError("raster has no contributing stations");

  AttributeGrid out = dem;
  std::vector<double> preds(sources.size()), weights(sources.size());
  for (std::size_t row = 0; row < dem.nrows; ++row) {
    for (std::size_t col = 0; col < dem.ncols; ++col) {
      const auto idx = dem.index(col, row);
      if (!dem.inside(col, row) || !ndvi.inside(col, row)) {
        out.values[idx] = out.nodata;
        out.mask[idx] = 0;
        continue;
      }
      const StationAttributes cell{dem.cell_center(col, row), dem.values[idx], ndvi.values[idx]};
      for (std::size_t s = 0; s < sources.size(); ++s) {
        preds[s] = sources[s].sub->model.predict(spatial_features(sources[s].sub->attrs, cell, sources[s].climate));
        if (request.method == RasterMethod::weighted) {
          weights[s] = request.fixed_weights
                           ? sources[s].fixed_weight
                           : intermediate_weight(bank.normalizer.normalize(station_distances(sources[s].sub->attrs, cell)),
                                                 bank.coefficients);
        }
      }
      double v = 0.0;
      switch (request.method) {
        case RasterMethod::single: v = preds[0]; break;
        case RasterMethod::average: v = aggregate_average(preds); break;
        case RasterMethod::weighted: v = aggregate_weighted(preds, weights); break;
      }
      out.values[idx] = v;
      out.mask[idx] = 1;
    }
  }
  return out;
}

TTestResult compare_rasters(const AttributeGrid& a, const AttributeGrid& b) {
  if (!a.same_geometry(b)) throw DataError("rasters differ in geometry");
  std::vector<double> x, y;
  for (std::size_t row = 0; row < a.nrows; ++row) {
    for (std::size_t col = 0; col < a.ncols; ++col) {
      if (!a.inside(col, row) || !b.inside(col, row)) continue;
      x.push_back(a.value(col, row));
      y.push_back(b.value(col, row));
    }
  }
  if (x.size() < 2) throw DataError("rasters share fewer than 2 unmasked cells");
  return paired_t_test(x, y);
}

PValueMatrix raster_matrix(const std::vector<std::string>& labels, const std::vector<AttributeGrid>& rasters) {
  if (rasters.size() < 2) throw DataError("a raster comparison needs at least 2 rasters");
  if (labels.size() != rasters.size()) throw DomainError("raster labels and rasters differ in count");
  PValueMatrix m;
  m.labels = labels;
  m.p.assign(rasters.size(), std::vector<std::optional<double>>(rasters.size()));
  for (std::size_t i = 0; i < rasters.size(); ++i) {
    for (std::size_t j = i + 1; j < rasters.size(); ++j) {
      const double p = compare_rasters(rasters[i], rasters[j]).p;
      m.p[i][j] = p;
      m.p[j][i] = p;
    }
  }
  return m;
}

}  // namespace frost
