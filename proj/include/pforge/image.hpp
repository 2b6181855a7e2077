// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "pforge/error.hpp"

namespace pforge {

// Dense float raster, row-major with interleaved channels. Used for color
// images (3 channels), masks (1 channel) and depth maps (1 channel).
class Image {
public:
  Image() = default;
  Image(int width, int height, int channels, float fill = 0.0f)
      : width_(width), height_(height), channels_(channels),
        data_(static_cast<size_t>(width) * height * channels, fill) {
    if (width <= 0 || height <= 0 || channels <= 0)
      throw_data("Image dimensions must be positive, got ", width, "x", height,
                 "x", channels);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  size_t size() const { return data_.size(); }

  float& at(int x, int y, int c = 0) {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }
  float at(int x, int y, int c = 0) const {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }

private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

using ColorImage = Image;  // 3 channels, values in [0,1]
using MaskImage = Image;   // 1 channel, values in [0,1]

// Output of the Z-buffer rasterizer. Uncovered pixels hold the background
// color (0,0,0), coverage false and depth +inf.
struct PnccImage {
  ColorImage pixels;              // HxWx3 in [0,1]
  std::vector<uint8_t> coverage;  // HxW, 1 where a triangle covered the pixel
  std::vector<float> depth;       // HxW camera-frame depth, +inf uncovered

  int width() const { return pixels.width(); }
  int height() const { return pixels.height(); }

  static constexpr float kNoDepth = std::numeric_limits<float>::infinity();
};

}  // namespace pforge
