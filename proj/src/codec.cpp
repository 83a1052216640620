// Copyright (c) 2026 the civc authors
// SPDX-License-Identifier: Apache-2.0

#include "civc/codec.hpp"

#include <stdexcept>
#include <string>
#include <utility>

#include "civc/motion.hpp"
#include "civc/transforms.hpp"

namespace civc::eval {
double psnr(const Frame& a, const Frame& b);
}

namespace civc::codec {

namespace {

int round_up(int v, int multiple) { return (v + multiple - 1) / multiple * multiple; }
int ceil_div(int a, int b) { return (a + b - 1) / b; }

entropy::Shape3 image_latent_shape(const CodecConfig& cfg, int width, int height) {
  int s = cfg.feature_scale;
  return {s * s, round_up(height, 2 * s) / s, round_up(width, 2 * s) / s};
}

entropy::Shape3 motion_latent_shape(const CodecConfig& cfg, int width, int height) {
  entropy::Shape3 img = image_latent_shape(cfg, width, height);
  return {2, ceil_div(img.height, cfg.cell_size), ceil_div(img.width, cfg.cell_size)};
}

const entropy::LatentGrid* ptr_of(const std::optional<entropy::LatentGrid>& o) {
  return o.has_value() ? &*o : nullptr;
}

FeatureTensor add_tensors(const FeatureTensor& a, const FeatureTensor& b) {
  FeatureTensor out(a.channels, a.height, a.width, a.scale);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = a.data[i] + b.data[i];
  return out;
}

FeatureTensor sub_tensors(const FeatureTensor& a, const FeatureTensor& b) {
  FeatureTensor out(a.channels, a.height, a.width, a.scale);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = a.data[i] - b.data[i];
  return out;
}

void check_frame(const Frame& frame, const CodecState& state, const char* kind) {
  if (frame.width != state.width || frame.height != state.height)
    throw IoError(std::string("frames: geometry mismatch at ") + kind + " frame");
}

void require_reference(const CodecState& state, const char* kind) {
  if (!state.has_reference)
    throw BitstreamError(std::string("reference: ") + kind + " frame without reference");
}

void add_trace(FrameTrace* trace, io::StreamId id, entropy::LatentGrid raw,
               entropy::LatentGrid coded, entropy::GaussianModel model,
               entropy::SkipMask mask) {
  if (trace == nullptr) return;
  trace->streams.push_back({id, std::move(raw), std::move(coded),
                            std::move(model), std::move(mask)});
}

// Reconstruction stages shared verbatim by encoder and decoder; running the
// same code on the same latents is what makes parity bit-exact.

void finish_i(const entropy::LatentGrid& lat, const CodecConfig& cfg,
              CodecState& state) {
  FeatureTensor f = transforms::synthesis(lat, cfg.qstep());
  f.scale = cfg.feature_scale;
  state.recon = transforms::synthesize_frame(f, state.width, state.height);
  state.recon_feat = std::move(f);
  state.prev_motion.reset();
  state.prev_residual.reset();
  state.has_reference = true;
}

// Decoded motion latents -> aligned reference features.
FeatureTensor aligned_from_motion(const entropy::LatentGrid& lat_m,
                                  const CodecConfig& cfg, const CodecState& state) {
  FeatureTensor mt = transforms::synthesis(lat_m, cfg.motion_qstep);
  MotionField mf = motion::tensor_to_motion(mt, cfg.cell_size);
  return motion::align(state.recon_feat, mf);
}

void finish_p(const FeatureTensor& pred, entropy::LatentGrid lat_m,
              entropy::LatentGrid lat_r, const CodecConfig& cfg,
              CodecState& state) {
  FeatureTensor rhat = transforms::synthesis(lat_r, cfg.qstep());
  FeatureTensor fhat = add_tensors(pred, rhat);
  state.recon = transforms::synthesize_frame(fhat, state.width, state.height);
  state.recon_feat = std::move(fhat);
  state.prev_motion = std::move(lat_m);
  state.prev_residual = std::move(lat_r);
}

void finish_ci(entropy::LatentGrid lat_m, const entropy::LatentGrid& lat_y,
               const CodecConfig& cfg, CodecState& state) {
  FeatureTensor f = transforms::synthesis(lat_y, cfg.qstep());
  f.scale = cfg.feature_scale;
  state.recon = transforms::synthesize_frame(f, state.width, state.height);
  state.recon_feat = std::move(f);
  state.prev_motion = std::move(lat_m);
  state.prev_residual.reset();
}

// Encoder-side motion coding, shared by P and cI pipelines. Estimates
// motion against the reconstruction, codes it under the given temporal
// prior, and returns (payload, decoded latents).
struct CodedMotion {
  io::StreamPayload payload;
  entropy::LatentGrid latents;
};

CodedMotion code_motion(const Frame& frame, const FeatureTensor& cur_feat,
                        const entropy::LatentGrid* temporal_prior,
                        const CodecConfig& cfg, CodecState& state,
                        FrameTrace* trace) {
  MotionField pixel_flow =
      motion::estimate_pixel_flow(state.recon, frame, cfg.search_radius);
  MotionField init = motion::init_feature_motion(
      pixel_flow, frame.height, frame.width, cfg.feature_scale, cfg.cell_size);
  MotionField refined =
      motion::refine_motion(init, state.recon_feat, cur_feat, cfg.refine_radius);

  entropy::LatentGrid raw =
      transforms::analysis(motion::motion_to_tensor(refined), cfg.motion_qstep);
  entropy::GaussianModel model = transforms::predict_motion_prior(
      state.recon_feat, cfg.cell_size, raw.shape, temporal_prior, cfg.prior);
  auto [lat, mask] = entropy::apply_skip(raw, model, cfg.tau_sigma);
  std::vector<uint8_t> bytes = entropy::encode_latents(lat, model, mask);
  add_trace(trace, io::StreamId::Motion, std::move(raw), lat, std::move(model),
            std::move(mask));
  return {{io::StreamId::Motion, std::move(bytes)}, std::move(lat)};
}

entropy::LatentGrid decode_motion(const io::StreamPayload& payload,
                                  const entropy::LatentGrid* temporal_prior,
                                  const CodecConfig& cfg, const CodecState& state) {
  entropy::Shape3 shape = motion_latent_shape(cfg, state.width, state.height);
  entropy::GaussianModel model = transforms::predict_motion_prior(
      state.recon_feat, cfg.cell_size, shape, temporal_prior, cfg.prior);
  return entropy::decode_latents(payload.bytes, model, cfg.tau_sigma, shape);
}

}  // namespace

FrameType schedule(int frame_index, int gop_size) {
  if (frame_index < 0 || gop_size < 1)
    throw std::invalid_argument("schedule: frame_index >= 0 and gop_size >= 1");
  if (frame_index == 0) return FrameType::I;
  return frame_index % gop_size == 0 ? FrameType::CI : FrameType::P;
}

FrameType schedule_variant(int frame_index, int gop_size, SchedulePolicy policy) {
  switch (policy) {
    case SchedulePolicy::Full:
      return schedule(frame_index, gop_size);
    case SchedulePolicy::POnly:
      return frame_index == 0 ? FrameType::I : FrameType::P;
    case SchedulePolicy::CIOnly:
      return frame_index == 0 ? FrameType::I : FrameType::CI;
  }
  throw std::invalid_argument("schedule: unknown policy");
}

io::FrameRecord encode_i(const Frame& frame, const CodecConfig& cfg,
                         CodecState& state, FrameTrace* trace) {
  check_frame(frame, state, "I");
  FeatureTensor f = transforms::extract_features(frame, cfg.feature_scale);
  entropy::LatentGrid raw = transforms::analysis(f, cfg.qstep());
  entropy::GaussianModel model = transforms::intra_prior(raw.shape, cfg.prior);
  auto [lat, mask] = entropy::apply_skip(raw, model, cfg.tau_sigma);
  std::vector<uint8_t> bytes = entropy::encode_latents(lat, model, mask);
  add_trace(trace, io::StreamId::Image, std::move(raw), lat, std::move(model),
            std::move(mask));

  io::FrameRecord record;
  record.type = FrameType::I;
  record.streams.push_back({io::StreamId::Image, std::move(bytes)});
  finish_i(lat, cfg, state);
  return record;
}

Frame decode_i(const io::FrameRecord& record, const CodecConfig& cfg,
               CodecState& state) {
  if (record.type != FrameType::I)
    throw BitstreamError("frame_type: expected an I record");
  io::validate_record(record);
  entropy::Shape3 shape = image_latent_shape(cfg, state.width, state.height);
  entropy::GaussianModel model = transforms::intra_prior(shape, cfg.prior);
  entropy::LatentGrid lat = entropy::decode_latents(record.streams[0].bytes, model,
                                                    cfg.tau_sigma, shape);
  finish_i(lat, cfg, state);
  return state.recon;
}

io::FrameRecord encode_p(const Frame& frame, const CodecConfig& cfg,
                         CodecState& state, FrameTrace* trace) {
  check_frame(frame, state, "P");
  require_reference(state, "P");
  FeatureTensor f = transforms::extract_features(frame, cfg.feature_scale);
  CodedMotion m =
      code_motion(frame, f, ptr_of(state.prev_motion), cfg, state, trace);

  FeatureTensor pred = aligned_from_motion(m.latents, cfg, state);
  FeatureTensor residual = sub_tensors(f, pred);
  entropy::LatentGrid raw = transforms::analysis(residual, cfg.qstep());
  entropy::GaussianModel model = transforms::predict_residual_prior(
      pred, cfg.qstep(), ptr_of(state.prev_residual), cfg.prior);
  auto [lat, mask] = entropy::apply_skip(raw, model, cfg.tau_sigma);
  std::vector<uint8_t> bytes = entropy::encode_latents(lat, model, mask);
  add_trace(trace, io::StreamId::Residual, std::move(raw), lat, std::move(model),
            std::move(mask));

  io::FrameRecord record;
  record.type = FrameType::P;
  record.streams.push_back(std::move(m.payload));
  record.streams.push_back({io::StreamId::Residual, std::move(bytes)});
  finish_p(pred, std::move(m.latents), std::move(lat), cfg, state);
  return record;
}

Frame decode_p(const io::FrameRecord& record, const CodecConfig& cfg,
               CodecState& state) {
  if (record.type != FrameType::P)
    throw BitstreamError("frame_type: expected a P record");
  io::validate_record(record);
  require_reference(state, "P");
  entropy::LatentGrid lat_m =
      decode_motion(record.streams[0], ptr_of(state.prev_motion), cfg, state);
  FeatureTensor pred = aligned_from_motion(lat_m, cfg, state);
  entropy::GaussianModel model = transforms::predict_residual_prior(
      pred, cfg.qstep(), ptr_of(state.prev_residual), cfg.prior);
  entropy::Shape3 shape = image_latent_shape(cfg, state.width, state.height);
  entropy::LatentGrid lat_r = entropy::decode_latents(record.streams[1].bytes,
                                                      model, cfg.tau_sigma, shape);
  finish_p(pred, std::move(lat_m), std::move(lat_r), cfg, state);
  return state.recon;
}

io::FrameRecord encode_ci(const Frame& frame, const CodecConfig& cfg,
                          CodecState& state, FrameTrace* trace) {
  check_frame(frame, state, "cI");
  require_reference(state, "cI");
  FeatureTensor f = transforms::extract_features(frame, cfg.feature_scale);
  // Fresh prediction chain: no temporal prior for the cI motion stream.
  CodedMotion m = code_motion(frame, f, nullptr, cfg, state, trace);

  FeatureTensor pred = aligned_from_motion(m.latents, cfg, state);
  // The current features are the only analysis input; the aligned reference
  // enters through the entropy model alone.
  entropy::LatentGrid raw = transforms::analysis(f, cfg.qstep());
  entropy::GaussianModel model =
      transforms::predict_ci_prior(pred, cfg.qstep(), cfg.prior);
  auto [lat, mask] = entropy::apply_skip(raw, model, cfg.tau_sigma);
  std::vector<uint8_t> bytes = entropy::encode_latents(lat, model, mask);
  add_trace(trace, io::StreamId::Image, std::move(raw), lat, std::move(model),
            std::move(mask));

  io::FrameRecord record;
  record.type = FrameType::CI;
  record.streams.push_back(std::move(m.payload));
  record.streams.push_back({io::StreamId::Image, std::move(bytes)});
  finish_ci(std::move(m.latents), lat, cfg, state);
  return record;
}

Frame decode_ci(const io::FrameRecord& record, const CodecConfig& cfg,
                CodecState& state) {
  if (record.type != FrameType::CI)
    throw BitstreamError("frame_type: expected a cI record");
  io::validate_record(record);
  require_reference(state, "cI");
  entropy::LatentGrid lat_m = decode_motion(record.streams[0], nullptr, cfg, state);
  FeatureTensor pred = aligned_from_motion(lat_m, cfg, state);
  entropy::GaussianModel model =
      transforms::predict_ci_prior(pred, cfg.qstep(), cfg.prior);
  entropy::Shape3 shape = image_latent_shape(cfg, state.width, state.height);
  entropy::LatentGrid lat_y = entropy::decode_latents(record.streams[1].bytes,
                                                      model, cfg.tau_sigma, shape);
  finish_ci(std::move(lat_m), lat_y, cfg, state);
  return state.recon;
}

EncodeResult encode_sequence(const std::vector<Frame>& frames,
                             const CodecConfig& cfg, SchedulePolicy policy,
                             bool want_traces) {
  CodecConfig checked = validate_config(cfg);
  if (frames.empty()) throw IoError("frames: empty sequence");
  const Frame& first = frames[0];
  if (first.width < 1 || first.height < 1 || first.width > 0xFFFF ||
      first.height > 0xFFFF)
    throw IoError("frames: dimensions outside container limits");

  CodecState state(first.width, first.height);
  EncodeResult result;
  std::vector<io::FrameRecord> records;
  records.reserve(frames.size());

  for (size_t i = 0; i < frames.size(); ++i) {
    if (!frames[i].same_geometry(first))
      throw IoError("frames: geometry mismatch at frame " + std::to_string(i));
    FrameType type =
        schedule_variant(static_cast<int>(i), checked.gop_size, policy);
    FrameTrace trace;
    FrameTrace* tp = want_traces ? &trace : nullptr;
    io::FrameRecord record;
    switch (type) {
      case FrameType::I: record = encode_i(frames[i], checked, state, tp); break;
      case FrameType::P: record = encode_p(frames[i], checked, state, tp); break;
      case FrameType::CI: record = encode_ci(frames[i], checked, state, tp); break;
    }
    FrameStats stats;
    stats.frame_index = static_cast<int>(i);
    stats.type = type;
    stats.bits = static_cast<int64_t>(record.serialized_size()) * 8;
    stats.psnr = eval::psnr(frames[i], state.recon);
    result.stats.push_back(stats);

    Frame recon = state.recon;
    recon.frame_index = static_cast<int>(i);
    result.recons.push_back(std::move(recon));
    if (want_traces) {
      trace.frame_index = static_cast<int>(i);
      trace.type = type;
      result.traces.push_back(std::move(trace));
    }
    records.push_back(std::move(record));
  }

  io::SequenceHeader header;
  header.width = static_cast<uint16_t>(first.width);
  header.height = static_cast<uint16_t>(first.height);
  header.bitdepth = 8;
  header.gop_size = static_cast<uint8_t>(checked.gop_size);
  header.quality_index = static_cast<uint8_t>(checked.quality_index);
  header.tau_sigma = checked.tau_sigma;
  header.frame_count = static_cast<uint32_t>(frames.size());
  result.bytes = io::write_container(header, records);
  return result;
}

std::vector<Frame> decode_sequence(const std::vector<uint8_t>& bytes) {
  return decode_sequence(bytes, CodecConfig{});
}

std::vector<Frame> decode_sequence(const std::vector<uint8_t>& bytes,
                                   const CodecConfig& base) {
  CodecConfig cfg = validate_config(base);
  io::Container container = io::read_container(bytes);
  const io::SequenceHeader& h = container.header;
  if (h.bitdepth != 8) throw BitstreamError("bitdepth: unsupported");
  if (h.width == 0 || h.height == 0)
    throw BitstreamError("geometry: zero frame dimension");
  if (h.quality_index >= cfg.quant.steps.size())
    throw BitstreamError("quality_index: out of range");
  if (!(h.tau_sigma >= 0.0f) || h.tau_sigma >= cfg.prior.sigma_max)
    throw BitstreamError("tau_sigma: out of range");
  if (h.gop_size < 1) throw BitstreamError("gop_size: out of range");
  cfg.gop_size = h.gop_size;
  cfg.quality_index = h.quality_index;
  cfg.tau_sigma = h.tau_sigma;

  CodecState state(h.width, h.height);
  std::vector<Frame> frames;
  frames.reserve(container.records.size());
  for (size_t i = 0; i < container.records.size(); ++i) {
    const io::FrameRecord& record = container.records[i];
    Frame recon;
    switch (record.type) {
      case FrameType::I: recon = decode_i(record, cfg, state); break;
      case FrameType::P: recon = decode_p(record, cfg, state); break;
      case FrameType::CI: recon = decode_ci(record, cfg, state); break;
    }
    recon.frame_index = static_cast<int>(i);
    frames.push_back(std::move(recon));
  }
  return frames;
}

}  // namespace civc::codec
