// Copyright (c) 2026 the civc authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared value types and configuration for the civc codec. Everything here is
// plain data: frames own their samples, tensors own their floats, and the
// config is validated once up front (validate_config) instead of sprinkling
// checks through the pipelines.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace civc {

// Error taxonomy, mapped to CLI exit codes: ConfigError -> 2 (usage),
// IoError -> 3 (file system / source format), BitstreamError -> 4 (container
// or payload contents). Messages start with the violated invariant's name.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class BitstreamError : public Error {
 public:
  using Error::Error;
};

// Rounding convention used everywhere a real value becomes an integer
// (quantization, sample reconstruction, window centers): round half away
// from zero. std::round implements exactly that; the wrapper names it.
inline float round_half_away(float v) { return std::round(v); }
inline double round_half_away(double v) { return std::round(v); }

// One luma plane. Chroma is out of scope; bit depth is 8 in v1 (the container
// reserves a header field for future depths).
struct Frame {
  int width = 0;
  int height = 0;
  int bitdepth = 8;
  int frame_index = 0;
  std::vector<uint8_t> plane;  // row-major, width * height samples

  Frame() = default;
  Frame(int w, int h, int bd = 8)
      : width(w), height(h), bitdepth(bd), plane(static_cast<size_t>(w) * h, 0) {}

  uint8_t& at(int y, int x) { return plane[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int y, int x) const { return plane[static_cast<size_t>(y) * width + x]; }

  bool same_geometry(const Frame& o) const {
    return width == o.width && height == o.height && bitdepth == o.bitdepth;
  }
  bool operator==(const Frame& o) const {
    return same_geometry(o) && plane == o.plane;
  }
};

// Dense [channels][height][width] float tensor. For frame-derived tensors,
// scale is the space-to-depth factor s and scale * width == padded frame
// width. Motion-field tensors reuse the type with scale = 1.
struct FeatureTensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  int scale = 1;
  std::vector<float> data;

  FeatureTensor() = default;
  FeatureTensor(int c, int h, int w, int s = 1)
      : channels(c), height(h), width(w), scale(s),
        data(static_cast<size_t>(c) * h * w, 0.0f) {}

  size_t index(int c, int y, int x) const {
    return (static_cast<size_t>(c) * height + y) * width + x;
  }
  float& at(int c, int y, int x) { return data[index(c, y, x)]; }
  float at(int c, int y, int x) const { return data[index(c, y, x)]; }
  size_t size() const { return data.size(); }
};

struct MotionVec {
  float dx = 0.0f;
  float dy = 0.0f;
};

// Per-cell displacement field. Units depend on the producer: pixel units out
// of estimate_pixel_flow (cell_size in pixels), feature units after
// init_feature_motion (cell_size in feature samples).
struct MotionField {
  int rows = 0;
  int cols = 0;
  int cell_size = 4;
  std::vector<MotionVec> vec;

  MotionField() = default;
  MotionField(int r, int c, int cell)
      : rows(r), cols(c), cell_size(cell), vec(static_cast<size_t>(r) * c) {}

  MotionVec& at(int r, int c) { return vec[static_cast<size_t>(r) * cols + c]; }
  const MotionVec& at(int r, int c) const { return vec[static_cast<size_t>(r) * cols + c]; }
};

enum class FrameType : uint8_t { I = 0, P = 1, CI = 2 };

inline const char* frame_type_name(FrameType t) {
  switch (t) {
    case FrameType::I: return "I";
    case FrameType::P: return "P";
    case FrameType::CI: return "cI";
  }
  return "?";
}

// Quantization steps indexed by quality_index, in sample-scale coefficient
// units (features keep the 0..255 range of the source samples). Index 0 is
// the finest step: 2040/8 = 255 puts the largest possible DC latent exactly
// at the coder's window bound.
struct QuantTable {
  std::array<float, 6> steps{8.0f, 12.0f, 17.0f, 24.0f, 34.0f, 48.0f};
};

// Coefficients of the affine sigma model shared by the prior predictors:
//   mu_i    = alpha * p_i
//   sigma_i = clamp(beta0 + beta1 * gain * sbar_i + beta2 * |p_i|,
//                   sigma_min, sigma_max)
// where p_i is the co-located previous latent (0 when absent) and sbar_i the
// local std-dev of the structure tensor over the block containing i.
// motion_structure_gain down-weights the texture term for motion latents,
// whose magnitudes do not scale with image texture (gain = 1 for residual
// and cI image latents).
struct PriorCoefficients {
  float alpha = 0.75f;
  float beta0 = 0.10f;
  float beta1 = 0.05f;
  float beta2 = 0.20f;
  float sigma_min = 0.01f;
  float sigma_max = 64.0f;
  float motion_structure_gain = 0.01f;
};

struct CodecConfig {
  int gop_size = 20;       // cI cadence; I only at frame 0
  int quality_index = 2;   // index into quant.steps
  float tau_sigma = 0.16f; // skip threshold; 0 disables skipping
  int search_radius = 16;  // pixel-flow search limit, pixels
  int refine_radius = 2;   // feature-domain refinement limit, cells
  int feature_scale = 2;   // space-to-depth factor s
  int cell_size = 4;       // motion cell size b, feature samples
  // Quantizer step for motion latents, feature units. Motion magnitudes are
  // bounded by the search geometry, not by sample amplitude, so they get a
  // fixed fine step: 0.5 makes a one-pixel pan at scale 2 (a constant
  // half-sample cell) code exactly, and keeps the largest possible motion
  // coefficient, 8 * (search_radius / scale + refine_radius), inside the
  // entropy coder's window.
  float motion_qstep = 0.5f;
  QuantTable quant;
  PriorCoefficients prior;

  float qstep() const { return quant.steps[static_cast<size_t>(quality_index)]; }
};

// Returns the config unchanged or throws ConfigError whose message begins
// with the name of the first violated invariant, in field order.
CodecConfig validate_config(const CodecConfig& cfg);

struct RDPoint {
  double bpp = 0.0;
  double psnr = 0.0;
};

// Per-frame accounting produced by the sequence encoder. bits counts the
// serialized frame record (type byte, stream framing, payloads); header
// bytes are not attributed to frames.
struct FrameStats {
  int frame_index = 0;
  FrameType type = FrameType::I;
  int64_t bits = 0;
  double psnr = 0.0;
};

}  // namespace civc
