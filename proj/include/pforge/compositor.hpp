// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "pforge/image.hpp"

namespace pforge {

struct Layer {
  ColorImage image;              // HxWx3 in [0,1]
  std::optional<MaskImage> mask; // HxW in [0,1]
};

struct CompositeFrame {
  ColorImage image;       // 512x512x3 by default
  MaskImage person_mask;  // same resolution
};

enum class MaskOr { Soft, Max };

constexpr int kCompositeSize = 512;

// Separable bilinear upsampling with top-left anchored coordinates
// (src = dst * S/D) and border clamp; preserves constants and value range.
// Rejects any axis that would shrink.
Image upsample_bilinear(const Image& src, int target_width, int target_height);

// Soft OR of two masks: a + b - a*b (reduces to bitwise OR on {0,1}).
// MaskOr::Max takes the elementwise max instead.
MaskImage person_mask(const MaskImage& m_head, const MaskImage& m_torso,
                      MaskOr mode = MaskOr::Soft);

// Head/torso/background fusion, per pixel and channel:
//   F = (F_head*M_head + F_torso*(1-M_head)) * M_person + F_bg*(1-M_person)
// Head and torso must carry masks. Layers smaller than the target are
// bilinearly upsampled (image and mask through the same kernel); the result
// is clamped to [0,1].
CompositeFrame fuse(const Layer& head, const Layer& torso, const Layer& background,
                    int target_size = kCompositeSize, MaskOr mode = MaskOr::Soft);

}  // namespace pforge
