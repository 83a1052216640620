// Copyright (c) 2026 the civc authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "civc/core.hpp"

// Discretized-Gaussian probability modeling, range coding, and
// probability-based entropy skipping.
//
// Payload byte format (stable; golden bitstreams depend on it):
//   Big-endian output of a 64-bit-low / 32-bit-range carry-handling range
//   coder with 16-bit quantized CDFs (total = 2^16, per-bin floor 2^-16).
//   The coder's first output byte is always 0x00 and is stripped; the
//   decoder seeds its 32-bit code register from the first 4 payload bytes.
//   Flush emits 5 low-register shifts, so after stripping the payload is
//   exactly (#renormalizations + 4) bytes: a 4-byte flush tail. A payload
//   that codes no elements is 0 bytes long.
//
// Per-element symbol alphabet: integers in [c - 255, c + 255] where
// c = round-half-away(mu). The width is fixed so that whether a value
// saturates never depends on sigma: reconstructions stay invariant under
// model perturbations that leave the coded values in range (the cI
// reference-invariance guarantee rests on this). Out-of-window values are
// saturated to the nearest window edge at encode time. The CDF is
// evaluated pointwise from a frozen 4097-entry quantized normal-CDF table
// (integer lerp), plus a unit ramp that gives every bin at least
// frequency 1; encoder and decoder share the construction bit-for-bit.

namespace civc::entropy {

inline constexpr uint32_t kCdfTotal = 1u << 16;

// Half-width of every coding window: symbols live in round(mu) +/- this.
inline constexpr int kWindowHalfWidth = 255;

struct Shape3 {
  int channels = 0;
  int height = 0;
  int width = 0;

  size_t size() const {
    return static_cast<size_t>(channels) * height * width;
  }
  bool operator==(const Shape3&) const = default;
};

// Per-element Gaussian parameters, same layout as the latent grid.
struct GaussianModel {
  Shape3 shape;
  std::vector<float> mu;
  std::vector<float> sigma;
};

// Latent values: coded entries are integers, skipped entries equal the
// model's mu (possibly non-integer).
struct LatentGrid {
  Shape3 shape;
  std::vector<float> values;
};

struct SkipMask {
  Shape3 shape;
  std::vector<uint8_t> skip;  // 1 = skipped

  size_t count_skipped() const;
};

// Quantized standard normal CDF, Phi(z) * 2^32, from a frozen table over
// z in [-8, 8] with integer lerp. Monotone nondecreasing; deterministic
// across platforms (pure IEEE-754 double ops plus integer arithmetic).
uint32_t phi_q32(double z);

// (theta, q_max): the distribution mode and the probability mass of the
// half-open unit bin around it. theta = mu; q_max = erf(1 / (2 sqrt(2) sigma)),
// strictly decreasing in sigma.
std::pair<double, double> mode_and_mass(double mu, double sigma);

// mask_i = (sigma_i < tau_sigma), a pure function of the model.
SkipMask compute_skip_mask(const GaussianModel& model, float tau_sigma);

// Quantization plus skip: where sigma_i < tau_sigma the output value is
// mu_i exactly and the element is masked; elsewhere the value is rounded
// half-away-from-zero and saturated into the element's coding window.
// The mask never depends on the values.
std::pair<LatentGrid, SkipMask> apply_skip(const LatentGrid& raw,
                                           const GaussianModel& model,
                                           float tau_sigma);

// Range-codes the non-masked elements in row-major order under the
// discretized Gaussian. Masked elements contribute zero payload bits.
// Throws std::invalid_argument on shape mismatch or a non-integer coded
// element.
std::vector<uint8_t> encode_latents(const LatentGrid& latents,
                                    const GaussianModel& model,
                                    const SkipMask& mask);

// Exact inverse of encode_latents. Recomputes the skip mask from
// (model.sigma, tau_sigma); masked elements are reconstructed as mu.
// Throws BitstreamError if the payload ends early or has trailing bytes.
LatentGrid decode_latents(const std::vector<uint8_t>& payload,
                          const GaussianModel& model, float tau_sigma,
                          Shape3 shape);

// Sum over non-masked elements of -log2(true Gaussian mass of the unit
// bin at the coded value, floored at 2^-16). The coder-efficiency
// yardstick: measured payload bits track this within a small bound.
double ideal_rate(const LatentGrid& latents, const GaussianModel& model,
                  const SkipMask& mask);

// Carry-handling range coder. Single-threaded state machines; distinct
// payloads may be coded on different threads.
class RangeEncoder {
 public:
  // start, size are 16-bit cumulative frequencies with total = kCdfTotal;
  // size >= 1.
  void encode(uint32_t start, uint32_t size, uint32_t total);
  // Flushes the low register and returns the payload with the leading
  // always-zero byte stripped. The encoder is spent afterwards.
  std::vector<uint8_t> finish();

 private:
  void shift_low();
  void emit(uint8_t byte);

  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t cache_size_ = 1;
  bool first_byte_done_ = false;
  std::vector<uint8_t> out_;
};

class RangeDecoder {
 public:
  // Reads the 4-byte code seed. Throws BitstreamError if fewer remain.
  explicit RangeDecoder(const std::vector<uint8_t>& payload);

  // Returns the cumulative-frequency target of the next symbol, in
  // [0, total). decode_update must follow with the located bin.
  uint32_t decode_freq(uint32_t total);
  void decode_update(uint32_t start, uint32_t size);

  size_t bytes_consumed() const { return pos_; }
  size_t bytes_remaining() const { return payload_.size() - pos_; }

 private:
  uint8_t read_byte();

  const std::vector<uint8_t>& payload_;
  size_t pos_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint32_t range_div_ = 0;
  uint32_t code_ = 0;
};

}  // namespace civc::entropy
