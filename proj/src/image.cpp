#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "ecosim/io.hpp"
#include "ecosim/sensing.hpp"

namespace ecosim {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

void write_png(const std::filesystem::path& path, int width, int height, int bit_depth,
               int color_type, const std::vector<png_bytep>& rows) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "wb"));
  if (!file) throw std::runtime_error("cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("failed writing PNG " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);  // rows are host-order (little-endian)
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_png_rgb8(const std::filesystem::path& path, int width, int height,
                    std::span<const std::uint8_t> rgb) {
  if (rgb.size() != static_cast<std::size_t>(width) * height * 3) {
    throw std::invalid_argument("RGB buffer size does not match image dimensions");
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    rows[static_cast<std::size_t>(y)] =
        const_cast<png_bytep>(rgb.data() + static_cast<std::size_t>(y) * width * 3);
  }
  write_png(path, width, height, 8, PNG_COLOR_TYPE_RGB, rows);
}

void write_png_gray16(const std::filesystem::path& path, int width, int height,
                      std::span<const std::uint16_t> gray) {
  if (gray.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("gray buffer size does not match image dimensions");
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    rows[static_cast<std::size_t>(y)] = reinterpret_cast<png_bytep>(
        const_cast<std::uint16_t*>(gray.data() + static_cast<std::size_t>(y) * width));
  }
  write_png(path, width, height, 16, PNG_COLOR_TYPE_GRAY, rows);
}

std::vector<std::uint8_t> render_map_pixels(const WorldState& world, const SimConfig& cfg) {
  const std::size_t cells = world.map.cell_count();
  std::vector<std::uint8_t> rgb(cells * 3);
  for (std::size_t c = 0; c < cells; ++c) {
    const Rgb color = rendered_color(world, c, cfg.sensing);
    for (int ch = 0; ch < 3; ++ch) {
      rgb[c * 3 + ch] = static_cast<std::uint8_t>(std::lround(color[ch] * 255.0f));
    }
  }
  return rgb;
}

void render_map_image(const WorldState& world, const SimConfig& cfg,
                      const std::filesystem::path& path) {
  write_png_rgb8(path, world.map.size, world.map.size, render_map_pixels(world, cfg));
}

void write_heightmap_png(const GridLayers& map, const std::filesystem::path& path) {
  std::vector<std::uint16_t> gray(map.cell_count());
  for (std::size_t c = 0; c < gray.size(); ++c) {
    gray[c] = static_cast<std::uint16_t>(std::clamp(map.rock[c], 0, 65535));
  }
  write_png_gray16(path, map.size, map.size, gray);
}

}  // namespace ecosim
