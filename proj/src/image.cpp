#include "skill/image.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include <zlib.h>

namespace skill::tactile {

TactileImage::TactileImage(int w, int h, uint8_t fill) : width(w), height(h) {
  if (w <= 0 || h <= 0)
    throw Error("invalid-image", "image dimensions must be positive");
  pixels.assign(static_cast<size_t>(w) * h, fill);
}

uint8_t TactileImage::clamped(int x, int y) const {
  x = std::clamp(x, 0, width - 1);
  y = std::clamp(y, 0, height - 1);
  return at(x, y);
}

// ---------------------------------------------------------------------------
// PGM (P5)

namespace {

void skip_pgm_space(const std::vector<uint8_t>& b, size_t& i) {
  while (i < b.size()) {
    if (std::isspace(b[i])) {
      ++i;
    } else if (b[i] == '#') {
      while (i < b.size() && b[i] != '\n') ++i;
    } else {
      break;
    }
  }
}

int read_pgm_int(const std::vector<uint8_t>& b, size_t& i) {
  skip_pgm_space(b, i);
  if (i >= b.size() || !std::isdigit(b[i]))
    throw Error("invalid-image", "malformed PGM header");
  int v = 0;
  while (i < b.size() && std::isdigit(b[i])) {
    v = v * 10 + (b[i] - '0');
    ++i;
  }
  return v;
}

}  // namespace

TactileImage decode_pgm(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    throw Error("invalid-image", "not a P5 PGM file");
  size_t i = 2;
  int w = read_pgm_int(bytes, i);
  int h = read_pgm_int(bytes, i);
  int maxval = read_pgm_int(bytes, i);
  if (maxval != 255)
    throw Error("invalid-image", "only 8-bit PGM is supported");
  ++i;  // single whitespace after maxval
  TactileImage img(w, h);
  if (bytes.size() - i < img.pixels.size())
    throw Error("invalid-image", "PGM data truncated");
  std::memcpy(img.pixels.data(), bytes.data() + i, img.pixels.size());
  return img;
}

std::vector<uint8_t> encode_pgm(const TactileImage& image) {
  std::string header = "P5\n" + std::to_string(image.width) + " " +
                       std::to_string(image.height) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

// ---------------------------------------------------------------------------
// PNG, 8-bit grayscale only. Deflate via zlib.

namespace {

constexpr uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a,
                                      '\n'};

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

uint32_t get_u32(const uint8_t* p) {
  return (static_cast<uint32_t>(p[0]) << 24) |
         (static_cast<uint32_t>(p[1]) << 16) |
         (static_cast<uint32_t>(p[2]) << 8) | p[3];
}

void append_chunk(std::vector<uint8_t>& out, const char type[4],
                  const std::vector<uint8_t>& data) {
  put_u32(out, static_cast<uint32_t>(data.size()));
  size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  uint32_t crc = crc32(0L, out.data() + crc_start, out.size() - crc_start);
  put_u32(out, crc);
}

int paeth(int a, int b, int c) {
  int p = a + b - c;
  int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace

std::vector<uint8_t> encode_png(const TactileImage& image) {
  std::vector<uint8_t> raw;
  raw.reserve(image.pixels.size() + image.height);
  for (int y = 0; y < image.height; ++y) {
    raw.push_back(0);  // filter: none
    const uint8_t* row = image.pixels.data() +
                         static_cast<size_t>(y) * image.width;
    raw.insert(raw.end(), row, row + image.width);
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<uint8_t> compressed(bound);
  if (compress2(compressed.data(), &bound, raw.data(),
                static_cast<uLong>(raw.size()), 9) != Z_OK)
    throw Error("io", "PNG deflate failed");
  compressed.resize(bound);

  std::vector<uint8_t> out(kPngSignature, kPngSignature + 8);
  std::vector<uint8_t> ihdr;
  put_u32(ihdr, static_cast<uint32_t>(image.width));
  put_u32(ihdr, static_cast<uint32_t>(image.height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(0);  // grayscale
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter method
  ihdr.push_back(0);  // no interlace
  append_chunk(out, "IHDR", ihdr);
  append_chunk(out, "IDAT", compressed);
  append_chunk(out, "IEND", {});
  return out;
}

TactileImage decode_png(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kPngSignature, 8) != 0)
    throw Error("invalid-image", "not a PNG file");

  uint32_t width = 0, height = 0;
  int bit_depth = 0, color_type = -1, interlace = 0;
  std::vector<uint8_t> idat;

  size_t i = 8;
  while (i + 8 <= bytes.size()) {
    uint32_t len = get_u32(bytes.data() + i);
    if (i + 12 + len > bytes.size())
      throw Error("invalid-image", "PNG chunk truncated");
    std::string type(bytes.begin() + i + 4, bytes.begin() + i + 8);
    const uint8_t* data = bytes.data() + i + 8;
    if (type == "IHDR") {
      if (len != 13) throw Error("invalid-image", "bad IHDR length");
      width = get_u32(data);
      height = get_u32(data + 4);
      bit_depth = data[8];
      color_type = data[9];
      interlace = data[12];
    } else if (type == "IDAT") {
      idat.insert(idat.end(), data, data + len);
    } else if (type == "IEND") {
      break;
    }
    i += 12 + len;
  }

  if (bit_depth != 8 || color_type != 0 || interlace != 0)
    throw Error("invalid-image",
                "only 8-bit non-interlaced grayscale PNG is supported");
  if (width == 0 || height == 0)
    throw Error("invalid-image", "empty PNG");

  size_t stride = width + 1;
  std::vector<uint8_t> raw(stride * height);
  uLongf raw_len = static_cast<uLongf>(raw.size());
  if (uncompress(raw.data(), &raw_len, idat.data(),
                 static_cast<uLong>(idat.size())) != Z_OK ||
      raw_len != raw.size())
    throw Error("invalid-image", "PNG inflate failed");

  TactileImage img(static_cast<int>(width), static_cast<int>(height));
  std::vector<uint8_t> prev(width, 0);
  for (uint32_t y = 0; y < height; ++y) {
    uint8_t filter = raw[y * stride];
    uint8_t* row = img.pixels.data() + static_cast<size_t>(y) * width;
    const uint8_t* src = raw.data() + y * stride + 1;
    for (uint32_t x = 0; x < width; ++x) {
      int a = x > 0 ? row[x - 1] : 0;
      int b = prev[x];
      int c = x > 0 ? prev[x - 1] : 0;
      int v = src[x];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += paeth(a, b, c); break;
        default:
          throw Error("invalid-image", "unknown PNG filter type");
      }
      row[x] = static_cast<uint8_t>(v & 0xff);
    }
    std::memcpy(prev.data(), row, width);
  }
  return img;
}

// ---------------------------------------------------------------------------

TactileImage load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open '" + path + "'");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0)
    return decode_png(bytes);
  return decode_pgm(bytes);
}

void save_image(const TactileImage& image, const std::string& path) {
  std::vector<uint8_t> bytes;
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".png") == 0)
    bytes = encode_png(image);
  else
    bytes = encode_pgm(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("io", "write failed for '" + path + "'");
}

std::string base64_encode(const std::vector<uint8_t>& bytes) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (size_t i = 0; i < bytes.size(); i += 3) {
    uint32_t v = bytes[i] << 16;
    int n = 1;
    if (i + 1 < bytes.size()) {
      v |= bytes[i + 1] << 8;
      n = 2;
    }
    if (i + 2 < bytes.size()) {
      v |= bytes[i + 2];
      n = 3;
    }
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(n >= 2 ? alphabet[(v >> 6) & 63] : '=');
    out.push_back(n == 3 ? alphabet[v & 63] : '=');
  }
  return out;
}

}  // namespace skill::tactile
