// Copyright (c) 2026 the civc authors
// SPDX-License-Identifier: Apache-2.0

#include "civc/motion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace civc::motion {

namespace {

constexpr int kPixelBlock = 8;

int clamp_int(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

int ceil_div(int a, int b) { return (a + b - 1) / b; }

int round_up(int v, int multiple) { return (v + multiple - 1) / multiple * multiple; }

// Lexicographic candidate order: cost, then |dx|+|dy|, then dy, then dx.
// Zero displacement wins every all-tie case.
template <typename Cost>
struct Best {
  Cost cost;
  int l1 = 0;
  int dy = 0;
  int dx = 0;
  bool valid = false;

  void offer(Cost c, int ddy, int ddx) {
    int l = std::abs(ddx) + std::abs(ddy);
    if (!valid || c < cost || (c == cost && (l < l1 || (l == l1 && (ddy < dy || (ddy == dy && ddx < dx)))))) {
      cost = c;
      l1 = l;
      dy = ddy;
      dx = ddx;
      valid = true;
    }
  }
};

float bilinear(const FeatureTensor& t, int c, float sy, float sx) {
  int y0 = static_cast<int>(std::floor(sy));
  int x0 = static_cast<int>(std::floor(sx));
  float fy = sy - static_cast<float>(y0);
  float fx = sx - static_cast<float>(x0);
  int y0c = clamp_int(y0, 0, t.height - 1);
  int y1c = clamp_int(y0 + 1, 0, t.height - 1);
  int x0c = clamp_int(x0, 0, t.width - 1);
  int x1c = clamp_int(x0 + 1, 0, t.width - 1);
  float top = (1.0f - fx) * t.at(c, y0c, x0c) + fx * t.at(c, y0c, x1c);
  float bot = (1.0f - fx) * t.at(c, y1c, x0c) + fx * t.at(c, y1c, x1c);
  return (1.0f - fy) * top + fy * bot;
}

// SAD between cur_feat and the ref_feat gather at displacement (dx, dy)
// over one cell, all channels. Double accumulation, fixed order.
double cell_sad(const FeatureTensor& ref_feat, const FeatureTensor& cur_feat,
                int y0, int y1, int x0, int x1, float dy, float dx) {
  double sad = 0.0;
  for (int c = 0; c < cur_feat.channels; ++c) {
    for (int y = y0; y < y1; ++y) {
      float sy = static_cast<float>(y) - dy;
      for (int x = x0; x < x1; ++x) {
        float sx = static_cast<float>(x) - dx;
        sad += std::fabs(cur_feat.at(c, y, x) - bilinear(ref_feat, c, sy, sx));
      }
    }
  }
  return sad;
}

}  // namespace

MotionField estimate_pixel_flow(const Frame& ref, const Frame& cur,
                                int search_radius) {
  if (!ref.same_geometry(cur))
    throw std::invalid_argument("shape mismatch: reference vs current frame");
  if (search_radius < 0)
    throw std::invalid_argument("search_radius: must be >= 0");

  int rows = ceil_div(cur.height, kPixelBlock);
  int cols = ceil_div(cur.width, kPixelBlock);
  MotionField field(rows, cols, kPixelBlock);
  for (int r = 0; r < rows; ++r) {
    int y0 = r * kPixelBlock;
    int y1 = std::min(y0 + kPixelBlock, cur.height);
    for (int c = 0; c < cols; ++c) {
      int x0 = c * kPixelBlock;
      int x1 = std::min(x0 + kPixelBlock, cur.width);
      Best<int64_t> best;
      for (int dy = -search_radius; dy <= search_radius; ++dy) {
        for (int dx = -search_radius; dx <= search_radius; ++dx) {
          int64_t sad = 0;
          for (int y = y0; y < y1; ++y) {
            int sy = clamp_int(y - dy, 0, ref.height - 1);
            for (int x = x0; x < x1; ++x) {
              int sx = clamp_int(x - dx, 0, ref.width - 1);
              sad += std::abs(static_cast<int>(cur.at(y, x)) - static_cast<int>(ref.at(sy, sx)));
            }
          }
          best.offer(sad, dy, dx);
        }
      }
      field.at(r, c) = {static_cast<float>(best.dx), static_cast<float>(best.dy)};
    }
  }
  return field;
}

MotionField init_feature_motion(const MotionField& pixel_flow,
                                int frame_height, int frame_width, int scale,
                                int cell_size) {
  if (scale < 1 || cell_size < 1)
    throw std::invalid_argument("shape mismatch: scale and cell_size must be >= 1");
  int feat_h = round_up(frame_height, 2 * scale) / scale;
  int feat_w = round_up(frame_width, 2 * scale) / scale;
  int rows = ceil_div(feat_h, cell_size);
  int cols = ceil_div(feat_w, cell_size);
  int footprint = cell_size * scale;  // cell extent in source pixels

  MotionField out(rows, cols, cell_size);
  for (int r = 0; r < rows; ++r) {
    int py0 = r * footprint;
    int py1 = std::min(py0 + footprint, frame_height);
    for (int c = 0; c < cols; ++c) {
      int px0 = c * footprint;
      int px1 = std::min(px0 + footprint, frame_width);
      double sum_dx = 0.0, sum_dy = 0.0;
      int64_t count = 0;
      for (int py = py0; py < py1; ++py) {
        int br = std::min(py / pixel_flow.cell_size, pixel_flow.rows - 1);
        for (int px = px0; px < px1; ++px) {
          int bc = std::min(px / pixel_flow.cell_size, pixel_flow.cols - 1);
          const MotionVec& v = pixel_flow.at(br, bc);
          sum_dx += v.dx;
          sum_dy += v.dy;
          ++count;
        }
      }
      MotionVec& o = out.at(r, c);
      if (count > 0) {
        o.dx = static_cast<float>(sum_dx / count / scale);
        o.dy = static_cast<float>(sum_dy / count / scale);
      }
    }
  }
  return out;
}

FeatureTensor align(const FeatureTensor& ref_feat, const MotionField& mf) {
  if (mf.rows < 1 || mf.cols < 1 || mf.cell_size < 1)
    throw std::invalid_argument("shape mismatch: empty motion field");
  FeatureTensor out(ref_feat.channels, ref_feat.height, ref_feat.width, ref_feat.scale);
  for (int c = 0; c < ref_feat.channels; ++c) {
    for (int y = 0; y < ref_feat.height; ++y) {
      int r = std::min(y / mf.cell_size, mf.rows - 1);
      for (int x = 0; x < ref_feat.width; ++x) {
        int cc = std::min(x / mf.cell_size, mf.cols - 1);
        const MotionVec& v = mf.at(r, cc);
        out.at(c, y, x) = bilinear(ref_feat, c,
                                   static_cast<float>(y) - v.dy,
                                   static_cast<float>(x) - v.dx);
      }
    }
  }
  return out;
}

MotionField refine_motion(const MotionField& init, const FeatureTensor& ref_feat,
                          const FeatureTensor& cur_feat, int refine_radius) {
  if (ref_feat.channels != cur_feat.channels || ref_feat.height != cur_feat.height ||
      ref_feat.width != cur_feat.width)
    throw std::invalid_argument("shape mismatch: reference vs current features");
  if (refine_radius < 0)
    throw std::invalid_argument("refine_radius: must be >= 0");

  MotionField out = init;
  for (int r = 0; r < init.rows; ++r) {
    int y0 = r * init.cell_size;
    int y1 = std::min(y0 + init.cell_size, cur_feat.height);
    if (y0 >= y1) continue;
    for (int c = 0; c < init.cols; ++c) {
      int x0 = c * init.cell_size;
      int x1 = std::min(x0 + init.cell_size, cur_feat.width);
      if (x0 >= x1) continue;
      const MotionVec& base = init.at(r, c);
      Best<double> best;
      for (int dy = -refine_radius; dy <= refine_radius; ++dy) {
        for (int dx = -refine_radius; dx <= refine_radius; ++dx) {
          double sad = cell_sad(ref_feat, cur_feat, y0, y1, x0, x1,
                                base.dy + static_cast<float>(dy),
                                base.dx + static_cast<float>(dx));
          best.offer(sad, dy, dx);
        }
      }
      out.at(r, c) = {base.dx + static_cast<float>(best.dx),
                      base.dy + static_cast<float>(best.dy)};
    }
  }
  return out;
}

FeatureTensor motion_to_tensor(const MotionField& mf) {
  FeatureTensor t(2, mf.rows, mf.cols, 1);
  for (int r = 0; r < mf.rows; ++r) {
    for (int c = 0; c < mf.cols; ++c) {
      t.at(0, r, c) = mf.at(r, c).dx;
      t.at(1, r, c) = mf.at(r, c).dy;
    }
  }
  return t;
}

MotionField tensor_to_motion(const FeatureTensor& tensor, int cell_size) {
  if (tensor.channels != 2)
    throw std::invalid_argument("shape mismatch: motion tensor must have 2 channels");
  MotionField mf(tensor.height, tensor.width, cell_size);
  for (int r = 0; r < tensor.height; ++r)
    for (int c = 0; c < tensor.width; ++c)
      mf.at(r, c) = {tensor.at(0, r, c), tensor.at(1, r, c)};
  return mf;
}

}  // namespace civc::motion
