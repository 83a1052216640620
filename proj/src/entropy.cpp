// Copyright (c) 2026 the civc authors
// SPDX-License-Identifier: Apache-2.0

#include "civc/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace civc::entropy {

namespace {

#include "phi_table.inc"

constexpr int kPhiPoints = 4096;  // table has kPhiPoints + 1 entries
constexpr double kPhiZMax = 8.0;
constexpr uint32_t kRenormBound = 1u << 24;

// Coding window and pointwise quantized CDF for one element.
//
// cum(k) = floor(rebased_gaussian(k) * (total - nbins) / span) + k for the
// k-th bin boundary, so cum(0) = 0, cum(nbins) = total, and every bin keeps
// frequency >= 1 (the 2^-16 floor) while the Gaussian shape carries the
// remaining mass. All quantities are integers derived from phi_q32, so the
// encoder and decoder agree bit-for-bit.
struct WindowCdf {
  int lo = 0;
  int nbins = 0;
  double mu = 0.0;
  double sigma = 1.0;
  uint32_t g_first = 0;
  uint32_t span = 0;

  int hi() const { return lo + nbins - 1; }

  uint32_t cum(int k) const {
    if (k <= 0) return 0;
    if (k >= nbins) return kCdfTotal;
    if (span == 0)  // flat region fallback: uniform bins
      return static_cast<uint32_t>(static_cast<uint64_t>(k) * kCdfTotal / nbins);
    double x = (static_cast<double>(lo) - 0.5) + static_cast<double>(k);
    uint32_t g = phi_q32((x - mu) / sigma);
    uint32_t num = g <= g_first ? 0 : g - g_first;
    if (num > span) num = span;
    uint64_t scaled = static_cast<uint64_t>(num) * (kCdfTotal - nbins) / span;
    return static_cast<uint32_t>(scaled) + static_cast<uint32_t>(k);
  }
};

WindowCdf make_window(float mu_f, float sigma_f) {
  WindowCdf w;
  w.mu = mu_f;
  w.sigma = sigma_f;
  int center = static_cast<int>(round_half_away(static_cast<double>(mu_f)));
  w.lo = center - kWindowHalfWidth;
  w.nbins = 2 * kWindowHalfWidth + 1;
  double base = static_cast<double>(w.lo) - 0.5;
  uint32_t g_last = phi_q32((base + w.nbins - w.mu) / w.sigma);
  w.g_first = phi_q32((base - w.mu) / w.sigma);
  w.span = g_last <= w.g_first ? 0 : g_last - w.g_first;
  return w;
}

void check_same_shape(const Shape3& a, const Shape3& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string("shape mismatch: ") + what);
}

void check_model(const GaussianModel& model) {
  if (model.mu.size() != model.shape.size() || model.sigma.size() != model.shape.size())
    throw std::invalid_argument("shape mismatch: model buffers vs shape");
}

}  // namespace

size_t SkipMask::count_skipped() const {
  return static_cast<size_t>(std::count(skip.begin(), skip.end(), uint8_t{1}));
}

uint32_t phi_q32(double z) {
  if (z <= -kPhiZMax) return kPhiTable[0];
  if (z >= kPhiZMax) return kPhiTable[kPhiPoints];
  double u = (z + kPhiZMax) * (kPhiPoints / (2.0 * kPhiZMax));
  int i = static_cast<int>(u);
  if (i >= kPhiPoints) return kPhiTable[kPhiPoints];
  uint64_t frac_q16 = static_cast<uint64_t>(std::llround((u - i) * 65536.0));
  uint64_t d = kPhiTable[i + 1] - kPhiTable[i];
  return kPhiTable[i] + static_cast<uint32_t>((d * frac_q16) >> 16);
}

std::pair<double, double> mode_and_mass(double mu, double sigma) {
  double q_max = std::erf(1.0 / (2.0 * std::numbers::sqrt2 * sigma));
  return {mu, q_max};
}

SkipMask compute_skip_mask(const GaussianModel& model, float tau_sigma) {
  check_model(model);
  SkipMask mask;
  mask.shape = model.shape;
  mask.skip.resize(model.shape.size());
  for (size_t i = 0; i < mask.skip.size(); ++i)
    mask.skip[i] = model.sigma[i] < tau_sigma ? 1 : 0;
  return mask;
}

std::pair<LatentGrid, SkipMask> apply_skip(const LatentGrid& raw,
                                           const GaussianModel& model,
                                           float tau_sigma) {
  check_same_shape(raw.shape, model.shape, "values vs model");
  check_model(model);
  if (raw.values.size() != raw.shape.size())
    throw std::invalid_argument("shape mismatch: values buffer vs shape");

  LatentGrid out;
  out.shape = raw.shape;
  out.values.resize(raw.values.size());
  SkipMask mask;
  mask.shape = raw.shape;
  mask.skip.resize(raw.values.size());

  for (size_t i = 0; i < raw.values.size(); ++i) {
    if (model.sigma[i] < tau_sigma) {
      out.values[i] = model.mu[i];
      mask.skip[i] = 1;
      continue;
    }
    mask.skip[i] = 0;
    float r = round_half_away(raw.values[i]);
    // Saturate into the coding window so the stored latent equals what the
    // decoder will reconstruct.
    int center = static_cast<int>(round_half_away(static_cast<double>(model.mu[i])));
    float lo = static_cast<float>(center - kWindowHalfWidth);
    float hi = static_cast<float>(center + kWindowHalfWidth);
    out.values[i] = std::min(std::max(r, lo), hi);
  }
  return {std::move(out), std::move(mask)};
}

std::vector<uint8_t> encode_latents(const LatentGrid& latents,
                                    const GaussianModel& model,
                                    const SkipMask& mask) {
  check_same_shape(latents.shape, model.shape, "latents vs model");
  check_same_shape(latents.shape, mask.shape, "latents vs mask");
  check_model(model);
  if (latents.values.size() != latents.shape.size() ||
      mask.skip.size() != latents.shape.size())
    throw std::invalid_argument("shape mismatch: buffers vs shape");

  size_t coded = latents.values.size() - mask.count_skipped();
  if (coded == 0) return {};

  RangeEncoder enc;
  for (size_t i = 0; i < latents.values.size(); ++i) {
    if (mask.skip[i]) continue;
    float v = latents.values[i];
    if (!(std::isfinite(v) && v == std::floor(v)))
      throw std::invalid_argument("non-integer coded element");
    WindowCdf w = make_window(model.mu[i], model.sigma[i]);
    double vd = std::min(std::max(static_cast<double>(v), static_cast<double>(w.lo)),
                         static_cast<double>(w.hi()));
    int k = static_cast<int>(vd) - w.lo;
    uint32_t c0 = w.cum(k);
    uint32_t c1 = w.cum(k + 1);
    enc.encode(c0, c1 - c0, kCdfTotal);
  }
  return enc.finish();
}

LatentGrid decode_latents(const std::vector<uint8_t>& payload,
                          const GaussianModel& model, float tau_sigma,
                          Shape3 shape) {
  check_same_shape(shape, model.shape, "requested shape vs model");
  check_model(model);

  LatentGrid out;
  out.shape = shape;
  out.values.resize(shape.size());

  size_t coded = 0;
  for (size_t i = 0; i < out.values.size(); ++i)
    if (!(model.sigma[i] < tau_sigma)) ++coded;

  if (coded == 0) {
    if (!payload.empty())
      throw BitstreamError("trailing: entropy payload for fully skipped grid");
    for (size_t i = 0; i < out.values.size(); ++i) out.values[i] = model.mu[i];
    return out;
  }

  RangeDecoder dec(payload);
  for (size_t i = 0; i < out.values.size(); ++i) {
    if (model.sigma[i] < tau_sigma) {
      out.values[i] = model.mu[i];
      continue;
    }
    WindowCdf w = make_window(model.mu[i], model.sigma[i]);
    uint32_t target = dec.decode_freq(kCdfTotal);
    int lo_k = 0;
    int hi_k = w.nbins - 1;
    while (lo_k < hi_k) {
      int mid = lo_k + (hi_k - lo_k) / 2;
      if (w.cum(mid + 1) > target)
        hi_k = mid;
      else
        lo_k = mid + 1;
    }
    uint32_t c0 = w.cum(lo_k);
    uint32_t c1 = w.cum(lo_k + 1);
    dec.decode_update(c0, c1 - c0);
    out.values[i] = static_cast<float>(w.lo + lo_k);
  }
  if (dec.bytes_remaining() != 0)
    throw BitstreamError("trailing: unread bytes in entropy payload");
  return out;
}

double ideal_rate(const LatentGrid& latents, const GaussianModel& model,
                  const SkipMask& mask) {
  check_same_shape(latents.shape, model.shape, "latents vs model");
  check_same_shape(latents.shape, mask.shape, "latents vs mask");
  check_model(model);

  constexpr double kFloor = 1.0 / 65536.0;
  double bits = 0.0;
  for (size_t i = 0; i < latents.values.size(); ++i) {
    if (mask.skip[i]) continue;
    double mu = model.mu[i];
    double sd = model.sigma[i] * std::numbers::sqrt2;
    double v = latents.values[i];
    double mass = 0.5 * (std::erf((v + 0.5 - mu) / sd) - std::erf((v - 0.5 - mu) / sd));
    bits -= std::log2(std::max(mass, kFloor));
  }
  return bits;
}

void RangeEncoder::encode(uint32_t start, uint32_t size, uint32_t total) {
  uint32_t r = range_ / total;
  low_ += static_cast<uint64_t>(start) * r;
  range_ = r * size;
  while (range_ < kRenormBound) {
    shift_low();
    range_ <<= 8;
  }
}

std::vector<uint8_t> RangeEncoder::finish() {
  for (int i = 0; i < 5; ++i) shift_low();
  return std::move(out_);
}

void RangeEncoder::shift_low() {
  if (static_cast<uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    uint8_t carry = static_cast<uint8_t>(low_ >> 32);
    uint8_t byte = cache_;
    do {
      emit(static_cast<uint8_t>(byte + carry));
      byte = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

void RangeEncoder::emit(uint8_t byte) {
  if (!first_byte_done_) {
    first_byte_done_ = true;
    // Nested-interval bound: no carry can reach the first shifted byte, so
    // it is the initial zero cache. Stripped from the payload.
    if (byte != 0) throw std::logic_error("range coder: nonzero leading byte");
    return;
  }
  out_.push_back(byte);
}

RangeDecoder::RangeDecoder(const std::vector<uint8_t>& payload)
    : payload_(payload) {
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | read_byte();
}

uint32_t RangeDecoder::decode_freq(uint32_t total) {
  range_div_ = range_ / total;
  uint32_t t = code_ / range_div_;
  return t >= total ? total - 1 : t;
}

void RangeDecoder::decode_update(uint32_t start, uint32_t size) {
  code_ -= start * range_div_;
  range_ = range_div_ * size;
  while (range_ < kRenormBound) {
    code_ = (code_ << 8) | read_byte();
    range_ <<= 8;
  }
}

uint8_t RangeDecoder::read_byte() {
  if (pos_ >= payload_.size())
    throw BitstreamError("truncated: entropy payload exhausted");
  return payload_[pos_++];
}

}  // namespace civc::entropy
