#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skill/error.hpp"

namespace skill::tactile {

/// 8-bit grayscale tactile frame (Gelsight-style), row-major, origin at the
/// top-left, x = column, y = row.
struct TactileImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;

  TactileImage() = default;
  TactileImage(int w, int h, uint8_t fill = 0);

  uint8_t at(int x, int y) const {
    return pixels[static_cast<size_t>(y) * width + x];
  }
  uint8_t& at(int x, int y) {
    return pixels[static_cast<size_t>(y) * width + x];
  }
  /// Edge-replicated access.
  uint8_t clamped(int x, int y) const;

  bool operator==(const TactileImage&) const = default;
};

/// PGM (P5) and 8-bit grayscale PNG, selected by file extension on save and
/// by magic bytes on load.
TactileImage load_image(const std::string& path);
void save_image(const TactileImage& image, const std::string& path);

TactileImage decode_pgm(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> encode_pgm(const TactileImage& image);
TactileImage decode_png(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> encode_png(const TactileImage& image);

std::string base64_encode(const std::vector<uint8_t>& bytes);

}  // namespace skill::tactile
