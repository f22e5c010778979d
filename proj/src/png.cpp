#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>
#include <png.h>

#include "frost/error.hpp"
#include "frost/raster.hpp"

namespace frost {

namespace {

void append_bytes(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void no_flush(png_structp) {}

[[noreturn]] void on_png_error(png_structp, png_const_charp message) { throw NumericalError(std::string("PNG: ") + message); }

void on_png_warning(png_structp, png_const_charp) {}

}  // namespace

std::vector<std::uint8_t> encode_png_rgba(std::uint32_t width, std::uint32_t height,
                                          const std::vector<std::uint8_t>& rgba) {
  if (width == 0 || height == 0) throw DomainError("PNG needs a non-empty image");
  if (rgba.size() != static_cast<std::size_t>(width) * height * 4) throw DomainError("PNG pixel buffer has wrong size");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, on_png_error, on_png_warning);
  if (!png) throw NumericalError("cannot create PNG writer");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> out;
  try {
    if (!info) throw NumericalError("cannot create PNG info");
    png_set_write_fn(png, &out, append_bytes, no_flush);
    png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGBA, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(width) * 4;
    for (std::uint32_t y = 0; y < height; ++y) {
      png_write_row(png, const_cast<png_bytep>(rgba.data() + y * stride));
    }
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_png_heatmap(const AttributeGrid& grid, const std::filesystem::path& path) {
  grid.check();
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.mask[i]) continue;
    lo = std::min(lo, grid.values[i]);
    hi = std::max(hi, grid.values[i]);
  }
  const bool any = lo <= hi;
  std::vector<std::uint8_t> rgba(grid.size() * 4, 0);
  for (std::size_t row = 0; row < grid.nrows; ++row) {
    const std::size_t y = grid.nrows - 1 - row;  // image rows run north to south
    for (std::size_t col = 0; col < grid.ncols; ++col) {
      if (!grid.inside(col, row)) continue;
      const double t = hi > lo ? (grid.value(col, row) - lo) / (hi - lo) : 0.5;
      auto* px = &rgba[(y * grid.ncols + col) * 4];
      px[0] = static_cast<std::uint8_t>(std::lround(255.0 * t));
      px[1] = 0;
      px[2] = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - t)));
      px[3] = 255;
    }
  }
  const auto png = encode_png_rgba(static_cast<std::uint32_t>(grid.ncols), static_cast<std::uint32_t>(grid.nrows), rgba);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(png.data()), static_cast<std::streamsize>(png.size()));

  nlohmann::json side{{"min", any ? nlohmann::json(lo) : nlohmann::json(nullptr)},
                      {"max", any ? nlohmann::json(hi) : nlohmann::json(nullptr)},
                      {"ramp", "blue-red"}};
  std::ofstream meta(path.string() + ".json");
  if (!meta) throw DataError("cannot write " + path.string() + ".json");
  meta << side.dump(2) << '\n';
}

}  // namespace frost
