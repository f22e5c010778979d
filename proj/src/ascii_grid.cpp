#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <sstream>

#include "frost/error.hpp"
#include "frost/ingest.hpp"

namespace frost {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

/// Whitespace tokenizer over a buffer.
class Tokens {
 public:
  explicit Tokens(std::string_view text) : text_(text) {}

  std::optional<std::string_view> peek() {
    skip();
    if (pos_ >= text_.size()) return std::nullopt;
    std::size_t end = pos_;
    while (end < text_.size() && !std::isspace(static_cast<unsigned char>(text_[end]))) ++end;
    return text_.substr(pos_, end - pos_);
  }

  std::optional<std::string_view> next() {
    auto tok = peek();
    if (tok) pos_ += tok->size();
    return tok;
  }

 private:
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::optional<double> to_double(std::string_view tok) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) return std::nullopt;
  return v;
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

AttributeGrid AttributeGrid::filled(double xll, double yll, double cell, std::size_t ncols, std::size_t nrows,
                                    double value, bool inside) {
  AttributeGrid g;
  g.xll_corner = xll;
  g.yll_corner = yll;
  g.cell_size = cell;
  g.ncols = ncols;
  g.nrows = nrows;
  g.values.assign(ncols * nrows, value);
  g.mask.assign(ncols * nrows, inside ? 1 : 0);
  g.check();
  return g;
}

GeoPoint AttributeGrid::cell_center(std::size_t col, std::size_t row) const {
  return {xll_corner + (static_cast<double>(col) + 0.5) * cell_size,
          yll_corner + (static_cast<double>(row) + 0.5) * cell_size};
}

std::size_t AttributeGrid::unmasked_count() const {
  return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; }));
}

bool AttributeGrid::same_geometry(const AttributeGrid& other) const {
  return ncols == other.ncols && nrows == other.nrows && cell_size == other.cell_size &&
         xll_corner == other.xll_corner && yll_corner == other.yll_corner;
}

void AttributeGrid::check() const {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw FormatError("grid cell size must be positive");
  if (ncols == 0 || nrows == 0) throw FormatError("grid dimensions must be positive");
  if (values.size() != ncols * nrows || mask.size() != ncols * nrows)
    throw FormatError("grid storage does not match ncols*nrows");
}

AttributeGrid parse_ascii_grid(std::string_view text) {
  Tokens tokens(text);
  std::map<std::string, double> header;
  while (auto tok = tokens.peek()) {
    if (!std::isalpha(static_cast<unsigned char>((*tok)[0]))) break;
    const std::string key = lower(*tok);
    if (key == "nan" || key == "inf") break;
    tokens.next();
    auto value_tok = tokens.next();
    if (!value_tok) throw FormatError("grid header keyword '" + key + "' has no value");
    auto value = to_double(*value_tok);
    if (!value) throw FormatError("grid header keyword '" + key + "' has non-numeric value");
    header[key] = *value;
  }

  auto require = [&](const char* key) -> double {
    auto it = header.find(key);
    if (it == header.end()) throw FormatError(std::string("grid header missing '") + key + "'");
    return it->second;
  };
  auto count = [&](const char* key) -> std::size_t {
    const double v = require(key);
    if (!(v >= 1.0) || v != std::floor(v)) throw FormatError(std::string("grid header '") + key + "' must be a positive integer");
    return static_cast<std::size_t>(v);
  };

  AttributeGrid g;
  g.ncols = count("ncols");
  g.nrows = count("nrows");
  g.cell_size = require("cellsize");
  if (!(g.cell_size > 0.0)) throw FormatError("grid cellsize must be positive");
  if (header.count("xllcorner")) {
    g.xll_corner = header["xllcorner"];
  } else if (header.count("xllcenter")) {
    g.xll_corner = header["xllcenter"] - 0.5 * g.cell_size;
  } else {
    throw FormatError("grid header missing 'xllcorner'");
  }
  if (header.count("yllcorner")) {
    g.yll_corner = header["yllcorner"];
  } else if (header.count("yllcenter")) {
    g.yll_corner = header["yllcenter"] - 0.5 * g.cell_size;
  } else {
    throw FormatError("grid header missing 'yllcorner'");
  }
  if (header.count("nodata_value")) g.nodata = header["nodata_value"];

  const std::size_t n = g.ncols * g.nrows;
  g.values.assign(n, g.nodata);
  g.mask.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto tok = tokens.next();
    if (!tok) {
      throw FormatError("grid body has " + std::to_string(i) + " values, header declares " + std::to_string(n));
    }
    auto v = to_double(*tok);
    if (!v) throw FormatError("grid body value '" + std::string(*tok) + "' is not numeric");
    // file rows run north to south
    const std::size_t file_row = i / g.ncols;
    const std::size_t col = i % g.ncols;
    const std::size_t idx = g.index(col, g.nrows - 1 - file_row);
    g.values[idx] = *v;
    g.mask[idx] = (std::isfinite(*v) && *v != g.nodata) ? 1 : 0;
  }
  if (tokens.next()) throw FormatError("grid body has more values than ncols*nrows");
  return g;
}

AttributeGrid parse_ascii_grid(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_ascii_grid(std::string_view(text));
}

AttributeGrid read_ascii_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open grid file " + path.string());
  return parse_ascii_grid(in);
}

void write_ascii_grid(const AttributeGrid& grid, std::ostream& out) {
  grid.check();
  out << "ncols " << grid.ncols << '\n'
      << "nrows " << grid.nrows << '\n'
      << "xllcorner " << shortest(grid.xll_corner) << '\n'
      << "yllcorner " << shortest(grid.yll_corner) << '\n'
      << "cellsize " << shortest(grid.cell_size) << '\n'
      << "NODATA_value " << shortest(grid.nodata) << '\n';
  const std::string nodata = shortest(grid.nodata);
  for (std::size_t r = grid.nrows; r-- > 0;) {
    for (std::size_t c = 0; c < grid.ncols; ++c) {
      if (c > 0) out << ' ';
      out << (grid.inside(c, r) ? shortest(grid.value(c, r)) : nodata);
    }
    out << '\n';
  }
}

void write_ascii_grid(const AttributeGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write grid file " + path.string());
  write_ascii_grid(grid, out);
}

std::optional<std::pair<std::size_t, std::size_t>> nearest_unmasked(const AttributeGrid& grid, GeoPoint p) {
  if (grid.size() == 0) return std::nullopt;
  const double cs = grid.cell_size;
  auto clamp_index = [](double f, std::size_t n) -> std::ptrdiff_t {
    if (!(f >= 0.0)) return 0;
    return std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(f), static_cast<std::ptrdiff_t>(n) - 1);
  };
  const std::ptrdiff_t c0 = clamp_index(std::floor((p.lon - grid.west()) / cs), grid.ncols);
  const std::ptrdiff_t r0 = clamp_index(std::floor((p.lat - grid.south()) / cs), grid.nrows);
  // distance from p to the grid rectangle loosens the ring lower bound
  const double dx = std::max({grid.west() - p.lon, 0.0, p.lon - grid.east()});
  const double dy = std::max({grid.south() - p.lat, 0.0, p.lat - grid.north()});
  const double outside = std::hypot(dx, dy);

  const std::ptrdiff_t max_ring = static_cast<std::ptrdiff_t>(std::max(grid.ncols, grid.nrows));
  double best = std::numeric_limits<double>::infinity();
  std::optional<std::pair<std::size_t, std::size_t>> found;
  auto visit = [&](std::ptrdiff_t c, std::ptrdiff_t r) {
    if (c < 0 || r < 0 || c >= static_cast<std::ptrdiff_t>(grid.ncols) || r >= static_cast<std::ptrdiff_t>(grid.nrows))
      return;
    const auto cu = static_cast<std::size_t>(c);
    const auto ru = static_cast<std::size_t>(r);
    if (!grid.inside(cu, ru)) return;
    const GeoPoint center = grid.cell_center(cu, ru);
    const double d = std::hypot(center.lon - p.lon, center.lat - p.lat);
    if (d < best) {
      best = d;
      found = std::pair{cu, ru};
    }
  };
  for (std::ptrdiff_t ring = 0; ring <= max_ring; ++ring) {
    if (found && (static_cast<double>(ring) - 0.5) * cs - outside > best) break;
    if (ring == 0) {
      visit(c0, r0);
      continue;
    }
    for (std::ptrdiff_t k = -ring; k <= ring; ++k) {
      visit(c0 + k, r0 - ring);
      visit(c0 + k, r0 + ring);
    }
    for (std::ptrdiff_t k = -ring + 1; k <= ring - 1; ++k) {
      visit(c0 - ring, r0 + k);
      visit(c0 + ring, r0 + k);
    }
  }
  return found;
}

AttributeGrid resample_grid(const AttributeGrid& src, double target_cell) {
  src.check();
  if (!(target_cell > 0.0)) throw DomainError("target cell size must be positive");
  if (target_cell < src.cell_size * (1.0 - 1e-12)) {
    throw DomainError("unsupported upsample: target cell " + shortest(target_cell) + " is finer than source cell " +
                      shortest(src.cell_size));
  }
  const double width = static_cast<double>(src.ncols) * src.cell_size;
  const double height = static_cast<double>(src.nrows) * src.cell_size;
  const auto tcols = static_cast<std::size_t>(std::max(1.0, std::ceil(width / target_cell - 1e-9)));
  const auto trows = static_cast<std::size_t>(std::max(1.0, std::ceil(height / target_cell - 1e-9)));

  AttributeGrid out = AttributeGrid::filled(src.xll_corner, src.yll_corner, target_cell, tcols, trows, src.nodata, false);
  out.nodata = src.nodata;
  std::vector<double> sum(out.size(), 0.0);
  std::vector<std::size_t> count(out.size(), 0);
  for (std::size_t r = 0; r < src.nrows; ++r) {
    for (std::size_t c = 0; c < src.ncols; ++c) {
      if (!src.inside(c, r)) continue;
      const GeoPoint center = src.cell_center(c, r);
      const auto tc = std::min(tcols - 1, static_cast<std::size_t>(std::floor((center.lon - out.west()) / target_cell)));
      const auto tr = std::min(trows - 1, static_cast<std::size_t>(std::floor((center.lat - out.south()) / target_cell)));
      sum[out.index(tc, tr)] += src.value(c, r);
      ++count[out.index(tc, tr)];
    }
  }
  const bool any_source = src.unmasked_count() > 0;
  for (std::size_t r = 0; r < trows; ++r) {
    for (std::size_t c = 0; c < tcols; ++c) {
      const std::size_t i = out.index(c, r);
      if (count[i] > 0) {
        out.values[i] = sum[i] / static_cast<double>(count[i]);
        out.mask[i] = 1;
      } else if (any_source) {
        auto nearest = nearest_unmasked(src, out.cell_center(c, r));
        out.values[i] = src.value(nearest->first, nearest->second);
      }
    }
  }
  return out;
}

double lookup_attribute(const AttributeGrid& grid, GeoPoint p) {
  grid.check();
  if (!(p.lon >= grid.west() && p.lon <= grid.east() && p.lat >= grid.south() && p.lat <= grid.north())) {
    throw OutOfExtentError("point (" + shortest(p.lon) + ", " + shortest(p.lat) + ") lies outside the grid extent");
  }
  const auto col = std::min(grid.ncols - 1, static_cast<std::size_t>(std::floor((p.lon - grid.west()) / grid.cell_size)));
  const auto row = std::min(grid.nrows - 1, static_cast<std::size_t>(std::floor((p.lat - grid.south()) / grid.cell_size)));
  if (grid.inside(col, row)) return grid.value(col, row);
  auto nearest = nearest_unmasked(grid, p);
  if (!nearest) throw DataError("grid has no unmasked cells");
  return grid.value(nearest->first, nearest->second);
}

}  // namespace frost
