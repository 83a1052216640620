// Copyright (c) 2026 the civc authors
// SPDX-License-Identifier: Apache-2.0
//
// Container and source-format I/O.
//
// Container layout (all integers little-endian):
//   header: magic "CIV1" | version u8 (=1) | width u16 | height u16 |
//           bitdepth u8 | gop_size u8 | quality_index u8 | tau_sigma f32 |
//           frame_count u32                                   (20 bytes)
//   per frame: frame_type u8 (0=I, 1=P, 2=cI) | payload_count u8 |
//              payload_count x { stream_id u8 | length u32 | bytes }
//
// Stream sets are fixed per frame type and ordered so a decoder can run
// single-pass: I carries [image], P carries [motion, residual], cI carries
// [motion, image]. tau_sigma and quality_index live in the header because the
// decoder must reproduce the encoder's skip decisions exactly.

#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "civc/core.hpp"

namespace civc::io {

inline constexpr char kMagic[4] = {'C', 'I', 'V', '1'};
inline constexpr uint8_t kVersion = 1;
// magic + version + width + height + bitdepth + gop + quality + tau + count
inline constexpr size_t kHeaderSize = 4 + 1 + 2 + 2 + 1 + 1 + 1 + 4 + 4;

enum class StreamId : uint8_t { Image = 0, Motion = 1, Residual = 2 };

struct SequenceHeader {
  uint16_t width = 0;
  uint16_t height = 0;
  uint8_t bitdepth = 8;
  uint8_t gop_size = 20;
  uint8_t quality_index = 2;
  float tau_sigma = 0.16f;
  uint32_t frame_count = 0;
};

struct StreamPayload {
  StreamId id = StreamId::Image;
  std::vector<uint8_t> bytes;
};

struct FrameRecord {
  FrameType type = FrameType::I;
  std::vector<StreamPayload> streams;

  size_t serialized_size() const;
};

struct Container {
  SequenceHeader header;
  std::vector<FrameRecord> records;
};

// Throws BitstreamError if the record's stream ids or their order do not
// match the fixed set for its frame type.
void validate_record(const FrameRecord& record);

// frame_count in the header must equal records.size().
std::vector<uint8_t> write_container(const SequenceHeader& header,
                                     const std::vector<FrameRecord>& records);

// Exact inverse of write_container. Throws BitstreamError naming the first
// problem: "magic", "version", "truncated", "frame_type", "streams",
// "trailing".
Container read_container(const std::vector<uint8_t>& bytes);

// YUV4MPEG2 reader. Accepts C420 variants (chroma planes are skipped) and
// Cmono; eight-bit only. Throws IoError on malformed headers or truncated
// frame data.
std::vector<Frame> read_y4m(std::istream& in);
std::vector<Frame> read_y4m_file(const std::string& path);

// Writes luma-only output as Cmono. Frames must share geometry.
void write_y4m(std::ostream& out, const std::vector<Frame>& frames);
void write_y4m_file(const std::string& path, const std::vector<Frame>& frames);

}  // namespace civc::io
