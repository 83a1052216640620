// Copyright (c) 2026 the civc authors
// SPDX-License-Identifier: Apache-2.0
//
// Quality and rate measurement: PSNR, BD-rate between RD curves, and the
// three sequence analyzers (drift, skip, rd) behind `civc analyze`.
//
// All analyzers return plain row structs; the *_csv helpers render them
// with fixed formatting so reports are byte-stable across runs (timing
// columns excepted, as they measure wall-clock behaviour).

#pragma once

#include <string>
#include <vector>

#include "civc/codec.hpp"
#include "civc/core.hpp"

namespace civc::eval {

// Peak signal-to-noise ratio over the luma plane, in dB against the 8-bit
// peak. Identical frames return +infinity. Throws std::invalid_argument on
// geometry mismatch.
double psnr(const Frame& a, const Frame& b);

// Bjontegaard rate difference between two RD curves, in percent. Negative
// means `test` spends less rate than `anchor` at equal quality. Each curve
// needs at least four points, strictly increasing in both psnr and bpp,
// and the psnr ranges must overlap; violations throw ConfigError. The
// interpolant is a monotone piecewise cubic on log-rate versus psnr,
// integrated exactly over the overlap, so bd_rate(x, x) is exactly zero.
double bd_rate(const std::vector<RDPoint>& anchor, const std::vector<RDPoint>& test);

// Encodes the sequence under the given schedule policy and returns the
// per-frame stats table. Requires at least 2 * gop_size frames so the
// schedule exercises at least one refresh decision; shorter input throws
// ConfigError.
std::vector<FrameStats> analyze_drift(const std::vector<Frame>& frames,
                                      const CodecConfig& cfg,
                                      codec::SchedulePolicy policy);

// One row per (quality, stream kind) pair. Timing compares entropy
// encode+decode wall time over the sequence's streams with skipping as
// configured versus forced off on the same latent grids, reported as the
// median of three single-threaded runs.
struct SkipRow {
  int quality = 0;
  std::string stream;  // "motion", "residual", or "image"
  double skip_ratio = 0.0;
  double time_with_skip_ms = 0.0;
  double time_without_skip_ms = 0.0;
};

std::vector<SkipRow> analyze_skip(const std::vector<Frame>& frames,
                                  const CodecConfig& base,
                                  const std::vector<int>& qualities);

// One row per quality point: mean per-frame PSNR and bits per pixel over
// the whole sequence (container header excluded, matching FrameStats).
struct RdRow {
  int quality = 0;
  double bpp = 0.0;
  double psnr = 0.0;
};

std::vector<RdRow> analyze_rd(const std::vector<Frame>& frames,
                              const CodecConfig& base,
                              const std::vector<int>& qualities);

// CSV renderers. Columns are fixed:
//   drift: frame_index,frame_type,bits,psnr
//   skip:  quality,stream,skip_ratio,time_with_skip_ms,time_without_skip_ms
//   rd:    quality,bpp,psnr,msssim   (msssim reserved, always empty)
// Infinite psnr prints as "inf".
std::string drift_csv(const std::vector<FrameStats>& rows);
std::string skip_csv(const std::vector<SkipRow>& rows);
std::string rd_csv(const std::vector<RdRow>& rows);

// Worker cap for the quality sweeps: CIVC_THREADS when set to a positive
// integer, otherwise the hardware concurrency (at least 1).
int thread_cap();

}  // namespace civc::eval
