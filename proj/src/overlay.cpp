#include "punchdet/overlay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace punchdet {

namespace {

constexpr int kGlyphW = 3;
constexpr int kGlyphH = 5;

// 3x5 glyphs, one row per entry, MSB is the leftmost column.
constexpr std::array<std::array<std::uint8_t, kGlyphH>, 13> kGlyphs{{
    {7, 5, 5, 5, 7},  // 0
    {2, 6, 2, 2, 7},  // 1
    {7, 1, 7, 4, 7},  // 2
    {7, 1, 7, 1, 7},  // 3
    {5, 5, 7, 1, 1},  // 4
    {7, 4, 7, 1, 7},  // 5
    {7, 4, 7, 5, 7},  // 6
    {7, 1, 1, 1, 1},  // 7
    {7, 5, 7, 5, 7},  // 8
    {7, 5, 7, 1, 7},  // 9
    {0, 0, 0, 0, 2},  // .
    {0, 0, 7, 0, 0},  // -
    {0, 0, 0, 0, 0},  // space
}};

int glyph_index(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c == '.') return 10;
  if (c == '-') return 11;
  return 12;
}

void put(PixelBuffer& img, std::int64_t x, std::int64_t y, const std::array<std::uint8_t, 3>& c) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  std::uint8_t* p = img.pixel(x, y);
  p[0] = c[0];
  p[1] = c[1];
  p[2] = c[2];
}

void fill(PixelBuffer& img, std::int64_t x0, std::int64_t y0, std::int64_t x1, std::int64_t y1,
          const std::array<std::uint8_t, 3>& c) {
  for (std::int64_t y = y0; y < y1; ++y) {
    for (std::int64_t x = x0; x < x1; ++x) put(img, x, y, c);
  }
}

}  // namespace

std::array<std::uint8_t, 3> class_color(ClassId cls) noexcept {
  // Knuth multiplicative hash onto the hue circle.
  const std::uint32_t h = static_cast<std::uint32_t>(cls) * 2654435761u;
  const double hue = static_cast<double>(h % 360u) / 60.0;
  const double s = 0.85, v = 0.95;
  const double c = v * s;
  const double x = c * (1.0 - std::fabs(std::fmod(hue, 2.0) - 1.0));
  const double m = v - c;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hue)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  const auto to8 = [m](double u) {
    return static_cast<std::uint8_t>(std::lround((u + m) * 255.0));
  };
  return {to8(r), to8(g), to8(b)};
}

void draw_detections(PixelBuffer& image, std::span<const Detection> dets,
                     const OverlayStyle& style) {
  static constexpr std::array<std::uint8_t, 3> kWhite{255, 255, 255};
  static constexpr std::array<std::uint8_t, 3> kBlack{0, 0, 0};
  const int lw = std::max(1, style.line_width);
  const int scale = std::max(1, style.glyph_scale);

  for (const auto& d : dets) {
    const auto color = class_color(d.class_id);
    const auto x0 = static_cast<std::int64_t>(std::floor(d.box.x_min));
    const auto y0 = static_cast<std::int64_t>(std::floor(d.box.y_min));
    const auto x1 = static_cast<std::int64_t>(std::ceil(d.box.x_max));
    const auto y1 = static_cast<std::int64_t>(std::ceil(d.box.y_max));
    fill(image, x0, y0, x1, y0 + lw, color);
    fill(image, x0, y1 - lw, x1, y1, color);
    fill(image, x0, y0, x0 + lw, y1, color);
    fill(image, x1 - lw, y0, x1, y1, color);

    char caption[48];
    std::snprintf(caption, sizeof caption, "%d %.2f", d.class_id, d.confidence);
    const std::string text = caption;
    const std::int64_t pad = scale;
    const std::int64_t cw = static_cast<std::int64_t>(text.size()) * (kGlyphW + 1) * scale + pad;
    const std::int64_t ch = kGlyphH * scale + 2 * pad;
    const std::int64_t lx = x0;
    const std::int64_t ly = y0 - ch >= 0 ? y0 - ch : y0 + lw;
    const std::int64_t lx0 = ly == y0 + lw ? lx + lw : lx;
    fill(image, lx0, ly, lx0 + cw, ly + ch, kWhite);
    for (std::size_t i = 0; i < text.size(); ++i) {
      const auto& glyph = kGlyphs[static_cast<std::size_t>(glyph_index(text[i]))];
      const std::int64_t gx = lx0 + pad + static_cast<std::int64_t>(i) * (kGlyphW + 1) * scale;
      for (int row = 0; row < kGlyphH; ++row) {
        for (int col = 0; col < kGlyphW; ++col) {
          if (!(glyph[static_cast<std::size_t>(row)] & (4 >> col))) continue;
          fill(image, gx + col * scale, ly + pad + row * scale, gx + (col + 1) * scale,
               ly + pad + (row + 1) * scale, kBlack);
        }
      }
    }
  }
}

}  // namespace punchdet
