// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#include "wffr/png.hpp"

#include <array>
#include <cmath>
#include <fstream>

namespace wffr {

namespace {

uint32_t crc32_table_entry(uint32_t n) {
  uint32_t c = n;
  for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
  return c;
}

uint32_t crc32(const uint8_t* data, size_t len, uint32_t crc = 0xFFFFFFFFu) {
  static std::array<uint32_t, 256> table = [] {
    std::array<uint32_t, 256> t{};
    for (uint32_t n = 0; n < 256; ++n) t[n] = crc32_table_entry(n);
    return t;
  }();
  for (size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
  return crc;
}

uint32_t adler32(const uint8_t* data, size_t len) {
  uint32_t a = 1, b = 0;
  for (size_t i = 0; i < len; ++i) {
    a = (a + data[i]) % 65521u;
    b = (b + a) % 65521u;
  }
  return (b << 16) | a;
}

void put_u32(std::vector<uint8_t>& v, uint32_t x) {
  v.push_back(uint8_t(x >> 24));
  v.push_back(uint8_t(x >> 16));
  v.push_back(uint8_t(x >> 8));
  v.push_back(uint8_t(x));
}

void write_chunk(std::ofstream& out, const char type[4], const std::vector<uint8_t>& data) {
  std::vector<uint8_t> buf;
  put_u32(buf, uint32_t(data.size()));
  buf.insert(buf.end(), type, type + 4);
  buf.insert(buf.end(), data.begin(), data.end());
  uint32_t crc = crc32(buf.data() + 4, buf.size() - 4) ^ 0xFFFFFFFFu;
  put_u32(buf, crc);
  out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
}

// zlib stream built from stored (uncompressed) deflate blocks
std::vector<uint8_t> zlib_stored(const std::vector<uint8_t>& raw) {
  std::vector<uint8_t> z;
  z.push_back(0x78);
  z.push_back(0x01);
  size_t pos = 0;
  do {
    size_t len = std::min<size_t>(raw.size() - pos, 65535);
    bool final = pos + len == raw.size();
    z.push_back(final ? 1 : 0);
    z.push_back(uint8_t(len & 0xFF));
    z.push_back(uint8_t(len >> 8));
    z.push_back(uint8_t(~len & 0xFF));
    z.push_back(uint8_t((~len >> 8) & 0xFF));
    z.insert(z.end(), raw.begin() + pos, raw.begin() + pos + len);
    pos += len;
  } while (pos < raw.size());
  put_u32(z, adler32(raw.data(), raw.size()));
  return z;
}

// compact viridis-like ramp, linearly interpolated
const double kAnchors[6][3] = {{68, 1, 84},    {59, 82, 139},  {33, 145, 140},
                               {94, 201, 98},  {253, 231, 37}, {253, 231, 37}};

void colormap(double u, uint8_t rgb[3]) {
  u = std::min(1.0, std::max(0.0, u));
  double x = u * 4.0;
  int i = std::min(3, int(x));
  double f = x - i;
  for (int c = 0; c < 3; ++c) {
    rgb[c] = uint8_t(std::lround(kAnchors[i][c] + f * (kAnchors[i + 1][c] - kAnchors[i][c])));
  }
}

}  // namespace

void write_png_rgb(const std::string& path, int width, int height,
                   const std::vector<uint8_t>& pixels) {
  if (width <= 0 || height <= 0 || pixels.size() != size_t(width) * height * 3) {
    throw ValidationError("write_png_rgb: bad dimensions for " + path);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  static const uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
  out.write(reinterpret_cast<const char*>(sig), 8);
  std::vector<uint8_t> ihdr;
  put_u32(ihdr, uint32_t(width));
  put_u32(ihdr, uint32_t(height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // truecolor
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  write_chunk(out, "IHDR", ihdr);
  std::vector<uint8_t> raw;
  raw.reserve(size_t(height) * (size_t(width) * 3 + 1));
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);  // filter: none
    const uint8_t* row = pixels.data() + size_t(y) * width * 3;
    raw.insert(raw.end(), row, row + size_t(width) * 3);
  }
  write_chunk(out, "IDAT", zlib_stored(raw));
  write_chunk(out, "IEND", {});
}

void write_grid_png(const std::string& path, const MatrixXd& grid) {
  const int T = int(grid.rows());
  const int S = int(grid.cols());
  double lo = grid.minCoeff();
  double hi = grid.maxCoeff();
  double span = hi - lo;
  std::vector<uint8_t> pixels(size_t(T) * S * 3);
  for (int s = 0; s < S; ++s) {
    for (int t = 0; t < T; ++t) {
      double u = span > 0 ? (grid(t, s) - lo) / span : 0.5;
      colormap(u, &pixels[(size_t(s) * T + t) * 3]);
    }
  }
  write_png_rgb(path, T, S, pixels);
}

}  // namespace wffr
