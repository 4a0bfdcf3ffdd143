#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "punchdet/detection.hpp"
#include "punchdet/image_store.hpp"

namespace punchdet {

/// Stable, saturated color for a class id.
std::array<std::uint8_t, 3> class_color(ClassId cls) noexcept;

struct OverlayStyle {
  int line_width = 2;
  int glyph_scale = 2;
};

/// Draws each detection as a class-colored outline with a "class confidence"
/// caption (black on white) above it, or just inside it at the top edge.
void draw_detections(PixelBuffer& image, std::span<const Detection> dets,
                     const OverlayStyle& style = {});

}  // namespace punchdet
