// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#include "pforge/inpaint.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>

#include "pforge/parallel.hpp"

namespace pforge {

void SegmentedImage::validate() const {
  if (image.channels() != 3)
    throw_data("SegmentedImage expects a 3-channel image, got ", image.channels());
  if (foreground.size() != static_cast<size_t>(image.width()) * image.height())
    throw_data("SegmentedImage mask size ", foreground.size(),
               " does not match image ", image.width(), "x", image.height());
}

namespace {

constexpr int64_t kNoSite = std::numeric_limits<int64_t>::max();

// Candidate ordering shared with the brute-force oracle: squared distance
// first, then row-major pixel index.
struct Candidate {
  int64_t dist2;
  int64_t index;

  bool operator<(const Candidate& other) const {
    return dist2 != other.dist2 ? dist2 < other.dist2 : index < other.index;
  }
};

void copy_pixel(const ColorImage& src, int sx, int sy, ColorImage& dst, int dx, int dy) {
  for (int c = 0; c < 3; ++c) dst.at(dx, dy, c) = src.at(sx, sy, c);
}

// Exact k=1 path: per-row nearest site (ties -> smaller column), then a
// per-column row sweep expanding outward from the query row. The comparator
// (dist2, row, col) matches row-major tie-breaking because the row phase
// already resolved the in-row tie to the smaller column.
ColorImage inpaint_nearest(const SegmentedImage& seg) {
  const int w = seg.image.width();
  const int h = seg.image.height();

  std::vector<int64_t> row_dist2(static_cast<size_t>(w) * h, kNoSite);
  std::vector<int32_t> row_col(static_cast<size_t>(w) * h, -1);
  for (int y = 0; y < h; ++y) {
    int64_t* dist_row = row_dist2.data() + static_cast<size_t>(y) * w;
    int32_t* col_row = row_col.data() + static_cast<size_t>(y) * w;
    int last = -1;
    for (int x = 0; x < w; ++x) {
      if (!seg.foreground[static_cast<size_t>(y) * w + x]) last = x;
      if (last >= 0) {
        const int64_t d = x - last;
        dist_row[x] = d * d;
        col_row[x] = last;
      }
    }
    int next = -1;
    for (int x = w - 1; x >= 0; --x) {
      if (!seg.foreground[static_cast<size_t>(y) * w + x]) next = x;
      if (next >= 0) {
        const int64_t d = next - x;
        // Strict <: on equal distance the left (smaller-index) site stays.
        if (d * d < dist_row[x]) {
          dist_row[x] = d * d;
          col_row[x] = next;
        }
      }
    }
  }

  ColorImage out = seg.image;
  parallel_chunks(h, [&](int y_begin, int y_end) {
    for (int y = y_begin; y < y_end; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!seg.foreground[static_cast<size_t>(y) * w + x]) continue;
        int64_t best = kNoSite;
        int best_row = -1;
        int best_col = -1;
        auto consider = [&](int r) {
          const int64_t rd = row_dist2[static_cast<size_t>(r) * w + x];
          if (rd == kNoSite) return;
          const int64_t dy = static_cast<int64_t>(y) - r;
          const int64_t total = dy * dy + rd;
          if (total < best || (total == best && r < best_row)) {
            best = total;
            best_row = r;
            best_col = row_col[static_cast<size_t>(r) * w + x];
          }
        };
        for (int r = y; r >= 0; --r) {
          const int64_t dy = static_cast<int64_t>(y) - r;
          if (best != kNoSite && dy * dy > best) break;
          consider(r);
        }
        for (int r = y + 1; r < h; ++r) {
          const int64_t dy = static_cast<int64_t>(r) - y;
          if (best != kNoSite && dy * dy > best) break;
          consider(r);
        }
        copy_pixel(seg.image, best_col, best_row, out, x, y);
      }
    }
  });
  return out;
}

// Exact k>1 path: expanding Chebyshev rings around the query pixel; ring
// rho+1 cannot contain any candidate with squared distance below (rho+1)^2,
// which bounds the search without giving up tie-rule exactness.
ColorImage inpaint_ring_search(const SegmentedImage& seg, int k) {
  const int w = seg.image.width();
  const int h = seg.image.height();
  ColorImage out = seg.image;

  parallel_chunks(h, [&](int y_begin, int y_end) {
    std::vector<Candidate> heap;  // max-heap: worst kept candidate on top
    heap.reserve(k + 1);
    std::vector<Candidate> chosen(k);
    const int max_rho = std::max(w, h);

    for (int y = y_begin; y < y_end; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!seg.foreground[static_cast<size_t>(y) * w + x]) continue;
        heap.clear();
        auto offer = [&](int cx, int cy) {
          if (cx < 0 || cx >= w || cy < 0 || cy >= h) return;
          if (seg.foreground[static_cast<size_t>(cy) * w + cx]) return;
          const int64_t dx = cx - x, dy = cy - y;
          Candidate cand{dx * dx + dy * dy, static_cast<int64_t>(cy) * w + cx};
          if (static_cast<int>(heap.size()) < k) {
            heap.push_back(cand);
            std::push_heap(heap.begin(), heap.end());
          } else if (cand < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = cand;
            std::push_heap(heap.begin(), heap.end());
          }
        };
        for (int rho = 0; rho <= max_rho; ++rho) {
          if (rho == 0) {
            offer(x, y);
          } else {
            for (int cx = x - rho; cx <= x + rho; ++cx) {
              offer(cx, y - rho);
              offer(cx, y + rho);
            }
            for (int cy = y - rho + 1; cy <= y + rho - 1; ++cy) {
              offer(x - rho, cy);
              offer(x + rho, cy);
            }
          }
          const int64_t next_min = static_cast<int64_t>(rho + 1) * (rho + 1);
          if (static_cast<int>(heap.size()) == k && heap.front().dist2 < next_min) break;
        }

        chosen.assign(heap.begin(), heap.end());
        std::sort(chosen.begin(), chosen.end());
        double acc[3] = {0.0, 0.0, 0.0};
        for (const Candidate& cand : chosen) {
          const int sy = static_cast<int>(cand.index / w);
          const int sx = static_cast<int>(cand.index % w);
          for (int c = 0; c < 3; ++c) acc[c] += seg.image.at(sx, sy, c);
        }
        for (int c = 0; c < 3; ++c)
          out.at(x, y, c) = static_cast<float>(acc[c] / k);
      }
    }
  });
  return out;
}

}  // namespace

ColorImage knn_inpaint(const SegmentedImage& seg, int k) {
  seg.validate();
  if (k < 1) throw_data("knn_inpaint requires k >= 1, got ", k);
  const size_t total = seg.foreground.size();
  size_t background = 0;
  for (uint8_t f : seg.foreground) background += f ? 0 : 1;
  if (background == 0) throw_data("knn_inpaint: image has no background pixels");
  if (static_cast<size_t>(k) > background)
    throw_data("knn_inpaint: k=", k, " exceeds background pixel count ", background);
  if (background == total) return seg.image;  // nothing to fill

  return k == 1 ? inpaint_nearest(seg) : inpaint_ring_search(seg, k);
}

}  // namespace pforge
