// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#include "pforge/compositor.hpp"

#include <algorithm>
#include <cmath>

namespace pforge {

Image upsample_bilinear(const Image& src, int target_width, int target_height) {
  if (src.empty()) throw_data("upsample_bilinear: empty source image");
  if (target_width < src.width() || target_height < src.height())
    throw_data("upsample_bilinear cannot downsample: source ", src.width(), "x",
               src.height(), ", target ", target_width, "x", target_height);
  if (target_width == src.width() && target_height == src.height()) return src;

  Image out(target_width, target_height, src.channels());
  const double sx = static_cast<double>(src.width()) / target_width;
  const double sy = static_cast<double>(src.height()) / target_height;
  for (int y = 0; y < target_height; ++y) {
    const double fy = std::min(y * sy, static_cast<double>(src.height() - 1));
    const int y0 = std::min(static_cast<int>(fy), src.height() - 2 >= 0 ? src.height() - 2 : 0);
    const int y1 = std::min(y0 + 1, src.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < target_width; ++x) {
      const double fx = std::min(x * sx, static_cast<double>(src.width() - 1));
      const int x0 = std::min(static_cast<int>(fx), src.width() - 2 >= 0 ? src.width() - 2 : 0);
      const int x1 = std::min(x0 + 1, src.width() - 1);
      const double wx = fx - x0;
      for (int c = 0; c < src.channels(); ++c) {
        const double top = (1.0 - wx) * src.at(x0, y0, c) + wx * src.at(x1, y0, c);
        const double bot = (1.0 - wx) * src.at(x0, y1, c) + wx * src.at(x1, y1, c);
        out.at(x, y, c) = static_cast<float>((1.0 - wy) * top + wy * bot);
      }
    }
  }
  return out;
}

MaskImage person_mask(const MaskImage& m_head, const MaskImage& m_torso, MaskOr mode) {
  if (!m_head.same_shape(m_torso))
    throw_data("person_mask shape mismatch: head ", m_head.width(), "x",
               m_head.height(), " vs torso ", m_torso.width(), "x", m_torso.height());
  if (m_head.channels() != 1)
    throw_data("person_mask expects single-channel masks, got ", m_head.channels());
  MaskImage out(m_head.width(), m_head.height(), 1);
  const auto& a = m_head.data();
  const auto& b = m_torso.data();
  auto& o = out.data();
  if (mode == MaskOr::Soft) {
    // a + b*(1-a) == a + b - a*b, but stays exactly 1 when a == 1.
    for (size_t i = 0; i < o.size(); ++i) o[i] = a[i] + b[i] * (1.0f - a[i]);
  } else {
    for (size_t i = 0; i < o.size(); ++i) o[i] = std::max(a[i], b[i]);
  }
  return out;
}

namespace {

Layer resize_layer(const Layer& layer, int size) {
  Layer out;
  out.image = (layer.image.width() == size && layer.image.height() == size)
                  ? layer.image
                  : upsample_bilinear(layer.image, size, size);
  if (layer.mask) {
    out.mask = (layer.mask->width() == size && layer.mask->height() == size)
                   ? *layer.mask
                   : upsample_bilinear(*layer.mask, size, size);
  }
  return out;
}

}  // namespace

CompositeFrame fuse(const Layer& head, const Layer& torso, const Layer& background,
                    int target_size, MaskOr mode) {
  if (!head.mask) throw_data("fuse: head layer is missing its mask");
  if (!torso.mask) throw_data("fuse: torso layer is missing its mask");
  if (head.image.channels() != 3 || torso.image.channels() != 3 ||
      background.image.channels() != 3)
    throw_data("fuse expects 3-channel layer images");
  if (background.image.width() != target_size || background.image.height() != target_size)
    throw_data("fuse: background must already be ", target_size, "x", target_size,
               ", got ", background.image.width(), "x", background.image.height());

  const Layer h = resize_layer(head, target_size);
  const Layer t = resize_layer(torso, target_size);

  CompositeFrame frame;
  frame.image = ColorImage(target_size, target_size, 3);
  frame.person_mask = person_mask(*h.mask, *t.mask, mode);

  for (int y = 0; y < target_size; ++y) {
    for (int x = 0; x < target_size; ++x) {
      const float mh = h.mask->at(x, y);
      const float mp = frame.person_mask.at(x, y);
      for (int c = 0; c < 3; ++c) {
        const float inner = h.image.at(x, y, c) * mh + t.image.at(x, y, c) * (1.0f - mh);
        const float v = inner * mp + background.image.at(x, y, c) * (1.0f - mp);
        frame.image.at(x, y, c) = std::clamp(v, 0.0f, 1.0f);
      }
    }
  }
  return frame;
}

}  // namespace pforge
