// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "pforge/image.hpp"

namespace pforge {

struct SegmentedImage {
  ColorImage image;                 // HxWx3 in [0,1]
  std::vector<uint8_t> foreground;  // HxW, 1 = person (to be filled)

  void validate() const;
};

// Fills each foreground pixel with the mean color of its k nearest background
// pixels under Euclidean pixel-coordinate distance. Equal distances resolve
// to the lowest row-major pixel index. Background pixels pass through
// bit-identically.
//
// k == 1 runs a separable exact nearest-site scan (per-row nearest site, then
// a per-column sweep over row candidates); k > 1 uses an expanding-ring exact
// search over the background grid. Both match the quadratic brute-force
// search exactly, including the tie rule.
ColorImage knn_inpaint(const SegmentedImage& seg, int k = 1);

}  // namespace pforge
