#include <fstream>

#include <json.hpp>

#include "frost/error.hpp"
#include "frost/ingest.hpp"

namespace frost {

bool BoundaryPolygon::contains(GeoPoint p) const {
  bool inside = false;
  for (const auto& ring : rings) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const GeoPoint& a = ring[i];
      const GeoPoint& b = ring[j];
      if ((a.lat > p.lat) != (b.lat > p.lat)) {
        const double x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
        if (p.lon < x) inside = !inside;
      }
    }
  }
  return inside;
}

void BoundaryPolygon::check() const {
  if (rings.empty()) throw FormatError("boundary polygon has no rings");
  for (const auto& ring : rings) {
    if (ring.size() < 3) throw FormatError("boundary ring needs at least 3 vertices");
  }
}

BoundaryPolygon parse_boundary_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("boundary JSON: ") + e.what());
  }
  BoundaryPolygon poly;
  try {
    for (const auto& ring : doc.at("rings")) {
      std::vector<GeoPoint> vertices;
      for (const auto& v : ring) {
        if (v.size() != 2) throw FormatError("boundary vertex must be [lon, lat]");
        vertices.push_back({v[0].get<double>(), v[1].get<double>()});
      }
      // drop an explicit closing vertex
      if (vertices.size() > 1 && vertices.front() == vertices.back()) vertices.pop_back();
      poly.rings.push_back(std::move(vertices));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("boundary JSON: ") + e.what());
  }
  poly.check();
  return poly;
}

BoundaryPolygon read_boundary_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open boundary file " + path.string());
  return parse_boundary_json(in);
}

void write_boundary_json(const BoundaryPolygon& poly, std::ostream& out) {
  nlohmann::json rings = nlohmann::json::array();
  for (const auto& ring : poly.rings) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& v : ring) r.push_back({v.lon, v.lat});
    rings.push_back(std::move(r));
  }
  out << nlohmann::json{{"rings", rings}}.dump() << '\n';
}

AttributeGrid apply_boundary_mask(AttributeGrid grid, const BoundaryPolygon& poly) {
  grid.check();
  for (std::size_t r = 0; r < grid.nrows; ++r) {
    for (std::size_t c = 0; c < grid.ncols; ++c) {
      const std::size_t i = grid.index(c, r);
      if (grid.mask[i] && !poly.contains(grid.cell_center(c, r))) grid.mask[i] = 0;
    }
  }
  return grid;
}

}  // namespace frost
