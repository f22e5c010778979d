#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "frost/core.hpp"

namespace frost {

/// Regular lat/lon raster of one scalar with an inclusion mask.
///
/// Rows are stored south-up: row 0 is the southernmost row. The lower-left
/// corner is stored exactly so that text round trips are bit-identical;
/// origin() is the centre of the lower-left cell. Masked cells (mask == 0)
/// keep whatever value they hold; writers emit `nodata` for them.
struct AttributeGrid {
  double xll_corner = 0.0;
  double yll_corner = 0.0;
  double cell_size = 0.0;
  std::size_t ncols = 0;
  std::size_t nrows = 0;
  double nodata = -9999.0;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;

  static AttributeGrid filled(double xll_corner, double yll_corner, double cell_size, std::size_t ncols, std::size_t nrows,
                              double value, bool inside = true);

  std::size_t index(std::size_t col, std::size_t row) const noexcept { return row * ncols + col; }
  std::size_t size() const noexcept { return ncols * nrows; }
  double value(std::size_t col, std::size_t row) const { return values[index(col, row)]; }
  bool inside(std::size_t col, std::size_t row) const { return mask[index(col, row)] != 0; }
  GeoPoint cell_center(std::size_t col, std::size_t row) const;

  GeoPoint origin() const noexcept { return {xll_corner + 0.5 * cell_size, yll_corner + 0.5 * cell_size}; }
  double west() const noexcept { return xll_corner; }
  double south() const noexcept { return yll_corner; }
  double east() const noexcept { return west() + static_cast<double>(ncols) * cell_size; }
  double north() const noexcept { return south() + static_cast<double>(nrows) * cell_size; }

  std::size_t unmasked_count() const;
  bool same_geometry(const AttributeGrid& other) const;

  /// Throws FormatError when sizes or cell size are inconsistent.
  void check() const;
};

/// Reads an ESRI ASCII grid (header keywords are case-insensitive).
AttributeGrid parse_ascii_grid(std::istream& in);
AttributeGrid parse_ascii_grid(std::string_view text);
AttributeGrid read_ascii_grid(const std::filesystem::path& path);

/// Writes an ESRI ASCII grid; values use round-trip precision.
void write_ascii_grid(const AttributeGrid& grid, std::ostream& out);
void write_ascii_grid(const AttributeGrid& grid, const std::filesystem::path& path);

/// Block-mean downsampling onto a coarser grid anchored at the source's
/// lower-left corner. Empty target cells take the nearest unmasked source
/// value and stay masked.
AttributeGrid resample_grid(const AttributeGrid& src, double target_cell);

struct BoundaryPolygon {
  /// First ring is the outer boundary, the rest are holes. Rings are
  /// implicitly closed.
  std::vector<std::vector<GeoPoint>> rings;

  /// Even-odd rule over all rings.
  bool contains(GeoPoint p) const;
  void check() const;
};

BoundaryPolygon parse_boundary_json(std::istream& in);
BoundaryPolygon read_boundary_json(const std::filesystem::path& path);
void write_boundary_json(const BoundaryPolygon& poly, std::ostream& out);

/// Clears the mask of every cell whose centre lies outside the polygon.
AttributeGrid apply_boundary_mask(AttributeGrid grid, const BoundaryPolygon& poly);

/// Value of the cell containing p; a masked cell falls back to the nearest
/// unmasked cell centre. Throws OutOfExtentError outside the grid.
double lookup_attribute(const AttributeGrid& grid, GeoPoint p);

/// Nearest unmasked cell (col, row) to p by centre distance, if any.
std::optional<std::pair<std::size_t, std::size_t>> nearest_unmasked(const AttributeGrid& grid, GeoPoint p);

// --- station CSV -----------------------------------------------------------

inline constexpr std::string_view kStationCsvHeader = "timestamp,temperature,dew_point,rh,wind_speed,wind_dir";

enum class TimestampFormat { minutes, iso8601 };

struct StationCsvResult {
  StationSeries series;
  std::size_t dropped = 0;
  TimestampFormat format = TimestampFormat::minutes;
};

/// Parses one station's CSV. Rows with unparsable, missing or invariant-breaking
/// fields are dropped and counted, so the result always passes validate_series.
StationCsvResult parse_station_csv(std::istream& in, const StationId& id, const StationAttributes& attrs);

void write_station_csv(const StationSeries& series, std::ostream& out,
                       TimestampFormat format = TimestampFormat::minutes);

/// "YYYY-MM-DDTHH:MM[:SS][Z]" to minutes since epoch (seconds truncated).
std::optional<std::int64_t> parse_iso_timestamp(std::string_view text);
std::string format_iso_timestamp(std::int64_t minutes);

struct StationSite {
  StationId id;
  GeoPoint location;
};

/// Station directory index `stations.csv` with header `id,lon,lat`.
std::vector<StationSite> parse_station_sites(std::istream& in);
void write_station_sites(const std::vector<StationSite>& sites, std::ostream& out);

// --- dataset bundle --------------------------------------------------------

/// Validated stations plus the attribute grids they were sampled from.
struct Dataset {
  std::vector<StationSeries> stations;  // sorted by id
  AttributeGrid dem;
  AttributeGrid ndvi;

  const StationSeries& station(const StationId& id) const;
  const StationSeries* find(const StationId& id) const;
  std::vector<StationId> station_ids() const;
};

struct IngestOptions {
  double target_cell = 0.01;
  std::optional<BoundaryPolygon> boundary;
};

struct IngestSummary {
  std::size_t stations = 0;
  std::size_t observations = 0;
  std::size_t dropped_rows = 0;
};

/// Resamples and masks the grids, looks up each station's DEM/NDVI in its
/// containing cell, and parses `<id>.csv` for every row of `stations.csv`.
Dataset ingest_station_directory(const std::filesystem::path& station_dir, AttributeGrid dem,
                                 AttributeGrid ndvi, const IngestOptions& options,
                                 IngestSummary* summary = nullptr);

void save_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace frost
