#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "punchdet/geometry.hpp"

namespace punchdet {

/// Punch category id (catalog number, e.g. 47, 138, 333, 388).
using ClassId = std::int32_t;

/// Model output: box, predicted class, confidence in [0, 1].
struct Detection {
  BoundingBox box;
  ClassId class_id = 0;
  double confidence = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Ground-truth instance in global image coordinates.
struct Annotation {
  std::string image_id;
  BoundingBox box;
  ClassId class_id = 0;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

/// Global-coordinate detections keyed by image id.
using DetectionsByImage = std::map<std::string, std::vector<Detection>>;

}  // namespace punchdet
