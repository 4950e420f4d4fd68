#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace posterkit {

// Grayscale raster with values in [0, 1], row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  static GrayImage filled(int w, int h, double value);
  double at(int x, int y) const { return pixels[std::size_t(y) * width + x]; }
  double& at(int x, int y) { return pixels[std::size_t(y) * width + x]; }
};

// One bit per pixel, stored unpacked (0 or 1), row-major.
struct BitMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  std::uint8_t at(int x, int y) const { return bits[std::size_t(y) * width + x]; }
  std::size_t count_set() const;
};

// Loads a PNG or JPEG (sniffed by magic bytes) as 8-bit grayscale,
// converting color inputs. Throws std::runtime_error on IO/decode errors.
GrayImage load_gray_image(const std::string& path);

// 8-bit grayscale PNG.
void save_gray_png(const GrayImage& img, const std::string& path);

// 1-bit grayscale PNG.
void save_mask_png(const BitMask& mask, const std::string& path);

}  // namespace posterkit
