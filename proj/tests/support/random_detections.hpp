#pragma once

#include <random>
#include <vector>

#include "punchdet/detection.hpp"

namespace punchdet::testing {

// Clustered boxes on a coarse lattice so nesting, exact IoM ties, duplicate
// areas and equal confidences all occur often.
inline std::vector<Detection> random_detections(std::mt19937_64& rng, std::size_t max_n,
                                                int classes = 2) {
  std::uniform_int_distribution<std::size_t> count(0, max_n);
  std::uniform_int_distribution<int> pos(0, 12);
  std::uniform_int_distribution<int> side(1, 10);
  std::uniform_int_distribution<int> cls(0, classes - 1);
  std::uniform_int_distribution<int> conf(0, 20);
  const std::size_t n = count(rng);
  std::vector<Detection> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = pos(rng) * 2.5, y = pos(rng) * 2.5;
    out.push_back({{x, y, x + side(rng) * 2.5, y + side(rng) * 2.5}, cls(rng), conf(rng) / 20.0});
  }
  return out;
}

}  // namespace punchdet::testing
