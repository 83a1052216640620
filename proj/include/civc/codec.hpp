// Copyright (c) 2026 the civc authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "civc/core.hpp"
#include "civc/entropy.hpp"
#include "civc/io.hpp"

// The three frame pipelines (I, P, cI), the GoP scheduler, and the sequence
// encoder/decoder. The master invariant: the decoder reproduces the
// encoder-side reconstruction of every frame bit-exactly, because both run
// the same reconstruction code on the same decoded latents.
//
// I-frames code image latents under a reference-free banded prior. P-frames
// code motion, align the previous features with the *decoded* motion, then
// code the feature residual. cI-frames code motion the same way but then
// code the current frame's own image latents, using the aligned reference
// only inside the entropy model: with skipping disabled the reconstruction
// is a function of the current frame and qstep alone.

namespace civc::codec {

// Frame-type cadence. Full is the normal mode: I at index 0, cI at every
// positive multiple of gop_size, P elsewhere. POnly and CIOnly are analysis
// schedules: I at 0 followed exclusively by P or cI frames.
enum class SchedulePolicy { Full, POnly, CIOnly };

FrameType schedule(int frame_index, int gop_size);
FrameType schedule_variant(int frame_index, int gop_size, SchedulePolicy policy);

// Rolling decoder-visible state. recon_feat keeps the reconstruction in
// feature space (float), so prediction does not re-quantize through the
// 8-bit frame; both sides compute it identically. Latent memories feed the
// temporal priors and reset at I and cI frames (cI then stores its own
// motion latents, starting a fresh chain).
struct CodecState {
  int width = 0;
  int height = 0;
  bool has_reference = false;
  Frame recon;
  FeatureTensor recon_feat;
  std::optional<entropy::LatentGrid> prev_motion;
  std::optional<entropy::LatentGrid> prev_residual;

  CodecState(int w, int h) : width(w), height(h) {}
};

// Everything the encoder knew about one coded stream; consumed by the skip
// analyzer and by white-box tests. raw holds the pre-quantization latents.
struct StreamTrace {
  io::StreamId id;
  entropy::LatentGrid raw;
  entropy::LatentGrid coded;
  entropy::GaussianModel model;
  entropy::SkipMask mask;
};

struct FrameTrace {
  int frame_index = 0;
  FrameType type = FrameType::I;
  std::vector<StreamTrace> streams;
};

// Per-frame pipelines. Encoders append the frame's payloads to a record and
// advance `state` to this frame's reconstruction (state.recon /
// state.recon_feat); decoders mirror them exactly. P and cI require
// state.has_reference and throw BitstreamError otherwise.
io::FrameRecord encode_i(const Frame& frame, const CodecConfig& cfg,
                         CodecState& state, FrameTrace* trace = nullptr);
io::FrameRecord encode_p(const Frame& frame, const CodecConfig& cfg,
                         CodecState& state, FrameTrace* trace = nullptr);
io::FrameRecord encode_ci(const Frame& frame, const CodecConfig& cfg,
                          CodecState& state, FrameTrace* trace = nullptr);

Frame decode_i(const io::FrameRecord& record, const CodecConfig& cfg,
               CodecState& state);
Frame decode_p(const io::FrameRecord& record, const CodecConfig& cfg,
               CodecState& state);
Frame decode_ci(const io::FrameRecord& record, const CodecConfig& cfg,
                CodecState& state);

struct EncodeResult {
  std::vector<uint8_t> bytes;        // complete container
  std::vector<Frame> recons;         // encoder-side reconstructions
  std::vector<FrameStats> stats;     // bits per frame; psnr vs. the source
  std::vector<FrameTrace> traces;    // filled only when requested
};

// Encodes the sequence under the schedule policy. Throws IoError for an
// empty list or mixed geometry, ConfigError for an invalid config (the
// config is validated here once).
EncodeResult encode_sequence(const std::vector<Frame>& frames,
                             const CodecConfig& cfg,
                             SchedulePolicy policy = SchedulePolicy::Full,
                             bool want_traces = false);

// Decodes a container produced by encode_sequence. Frame types come from
// the records; gop_size, quality_index, and tau_sigma come from the header.
// The overload's `base` supplies the non-header codec constants
// (feature_scale, cell_size, quantizer table, prior coefficients) for
// matched encode/decode experiments; the single-argument form uses the
// defaults, which are the v1 format constants.
std::vector<Frame> decode_sequence(const std::vector<uint8_t>& bytes);
std::vector<Frame> decode_sequence(const std::vector<uint8_t>& bytes,
                                   const CodecConfig& base);

}  // namespace civc::codec
