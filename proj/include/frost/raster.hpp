#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "frost/ensemble.hpp"
#include "frost/evaluate.hpp"
#include "frost/ingest.hpp"

namespace frost {

enum class RasterMethod { single, average, weighted };

struct RasterRequest {
  RasterMethod method = RasterMethod::average;
  std::optional<StationId> station;  // required for single
  /// Replaces the per-cell distance weights of the weighted method.
  std::optional<StationWeights> fixed_weights;
};

/// Parses avg, wavg or single:<id>.
RasterRequest parse_raster_method(const std::string& token);

using ClimateSnapshot = std::map<StationId, ClimateVector>;

/// Each bank source's climate at exactly `timestamp`; sources without an
/// observation then are left out.
ClimateSnapshot climate_snapshot(const Dataset& data, const SubmodelBank& bank, std::int64_t timestamp);

/// Prediction for every cell unmasked in both grids; other cells are NODATA.
/// Output geometry equals the DEM's.
AttributeGrid generate_raster(const SubmodelBank& bank, const ClimateSnapshot& climate, const AttributeGrid& dem,
                              const AttributeGrid& ndvi, const RasterRequest& request);

/// Paired t-test over jointly unmasked cells in row-major order.
TTestResult compare_rasters(const AttributeGrid& a, const AttributeGrid& b);

PValueMatrix raster_matrix(const std::vector<std::string>& labels, const std::vector<AttributeGrid>& rasters);

/// Heatmap with a linear blue-to-red ramp, NODATA transparent; writes
/// `<path>.json` holding the ramp's min and max.
void write_png_heatmap(const AttributeGrid& grid, const std::filesystem::path& path);

/// RGBA8 PNG bytes (rows top to bottom).
std::vector<std::uint8_t> encode_png_rgba(std::uint32_t width, std::uint32_t height,
                                          const std::vector<std::uint8_t>& rgba);

}  // namespace frost
