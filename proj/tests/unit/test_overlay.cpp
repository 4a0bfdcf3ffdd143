#include <doctest.h>

#include "punchdet/overlay.hpp"

using namespace punchdet;

TEST_CASE("no detections leaves the image untouched") {
  PixelBuffer img(64, 48, 17);
  const PixelBuffer copy = img;
  draw_detections(img, {});
  CHECK(img == copy);
}

TEST_CASE("outline uses the class color and the inside stays clean") {
  PixelBuffer img(200, 200, 0);
  const std::vector<Detection> dets{{{50, 60, 150, 160}, 138, 0.87}};
  draw_detections(img, dets);
  const auto color = class_color(138);
  for (int k = 0; k < 3; ++k) {
    CHECK(img.pixel(50, 120)[k] == color[k]);
    CHECK(img.pixel(149, 120)[k] == color[k]);
    CHECK(img.pixel(100, 159)[k] == color[k]);
    CHECK(img.pixel(100, 120)[k] == 0);
  }
  // Caption sits above the box on a white plate.
  bool white_above = false;
  for (int y = 0; y < 60; ++y)
    for (int x = 50; x < 100; ++x) white_above = white_above || img.pixel(x, y)[0] == 255;
  CHECK(white_above);
}

TEST_CASE("drawing is deterministic and clipped to the image") {
  PixelBuffer a(120, 80, 5), b(120, 80, 5);
  const std::vector<Detection> dets{{{-10, -10, 40, 30}, 1, 0.5}, {{100, 60, 130, 90}, 2, 1.0}};
  draw_detections(a, dets);
  draw_detections(b, dets);
  CHECK(a == b);
  CHECK(a.rgb.size() == 120 * 80 * 3);
}

TEST_CASE("class colors are stable and distinct") {
  CHECK(class_color(47) == class_color(47));
  CHECK(class_color(47) != class_color(48));
  CHECK(class_color(138) != class_color(333));
}
