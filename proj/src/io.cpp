// Copyright (c) 2026 the civc authors
// SPDX-License-Identifier: Apache-2.0

#include "civc/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace civc::io {

namespace {

void put_u8(std::vector<uint8_t>& out, uint8_t v) { out.push_back(v); }

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xFF));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::vector<uint8_t>& out, float v) {
  put_u32(out, std::bit_cast<uint32_t>(v));
}

class Reader {
 public:
  explicit Reader(const std::vector<uint8_t>& bytes) : data_(bytes) {}

  uint8_t u8() { return take(1)[0]; }
  uint16_t u16() {
    const uint8_t* p = take(2);
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
  }
  uint32_t u32() {
    const uint8_t* p = take(4);
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::vector<uint8_t> bytes(size_t n) {
    const uint8_t* p = take(n);
    return std::vector<uint8_t>(p, p + n);
  }
  size_t remaining() const { return data_.size() - pos_; }

 private:
  const uint8_t* take(size_t n) {
    if (data_.size() - pos_ < n) throw BitstreamError("truncated: container ends mid-field");
    const uint8_t* p = data_.data() + pos_;
    pos_ += n;
    return p;
  }
  const std::vector<uint8_t>& data_;
  size_t pos_ = 0;
};

// Fixed stream set and order per frame type.
const std::vector<StreamId>& expected_streams(FrameType t) {
  static const std::vector<StreamId> i_set{StreamId::Image};
  static const std::vector<StreamId> p_set{StreamId::Motion, StreamId::Residual};
  static const std::vector<StreamId> ci_set{StreamId::Motion, StreamId::Image};
  switch (t) {
    case FrameType::I: return i_set;
    case FrameType::P: return p_set;
    case FrameType::CI: return ci_set;
  }
  throw BitstreamError("frame_type: unknown value");
}

}  // namespace

size_t FrameRecord::serialized_size() const {
  size_t n = 2;  // frame_type + payload_count
  for (const StreamPayload& s : streams) n += 1 + 4 + s.bytes.size();
  return n;
}

void validate_record(const FrameRecord& record) {
  const std::vector<StreamId>& want = expected_streams(record.type);
  if (record.streams.size() != want.size())
    throw BitstreamError("streams: wrong payload count for frame type");
  for (size_t i = 0; i < want.size(); ++i) {
    if (record.streams[i].id != want[i])
      throw BitstreamError("streams: wrong stream id or order for frame type");
  }
}

std::vector<uint8_t> write_container(const SequenceHeader& header,
                                     const std::vector<FrameRecord>& records) {
  if (header.frame_count != records.size())
    throw BitstreamError("frame_count: header does not match record count");
  std::vector<uint8_t> out;
  out.reserve(kHeaderSize);
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u8(out, kVersion);
  put_u16(out, header.width);
  put_u16(out, header.height);
  put_u8(out, header.bitdepth);
  put_u8(out, header.gop_size);
  put_u8(out, header.quality_index);
  put_f32(out, header.tau_sigma);
  put_u32(out, header.frame_count);
  for (const FrameRecord& rec : records) {
    validate_record(rec);
    put_u8(out, static_cast<uint8_t>(rec.type));
    put_u8(out, static_cast<uint8_t>(rec.streams.size()));
    for (const StreamPayload& s : rec.streams) {
      put_u8(out, static_cast<uint8_t>(s.id));
      if (s.bytes.size() > UINT32_MAX) throw BitstreamError("streams: payload too large");
      put_u32(out, static_cast<uint32_t>(s.bytes.size()));
      out.insert(out.end(), s.bytes.begin(), s.bytes.end());
    }
  }
  return out;
}

Container read_container(const std::vector<uint8_t>& bytes) {
  Reader r(bytes);
  char magic[4];
  std::vector<uint8_t> m = r.bytes(4);
  std::memcpy(magic, m.data(), 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw BitstreamError("magic: not a CIV1 stream");
  uint8_t version = r.u8();
  if (version != kVersion) throw BitstreamError("version: unsupported");
  Container c;
  c.header.width = r.u16();
  c.header.height = r.u16();
  c.header.bitdepth = r.u8();
  c.header.gop_size = r.u8();
  c.header.quality_index = r.u8();
  c.header.tau_sigma = r.f32();
  c.header.frame_count = r.u32();
  c.records.reserve(c.header.frame_count);
  for (uint32_t i = 0; i < c.header.frame_count; ++i) {
    FrameRecord rec;
    uint8_t t = r.u8();
    if (t > 2) throw BitstreamError("frame_type: unknown value");
    rec.type = static_cast<FrameType>(t);
    uint8_t count = r.u8();
    rec.streams.reserve(count);
    for (uint8_t s = 0; s < count; ++s) {
      StreamPayload p;
      uint8_t id = r.u8();
      if (id > 2) throw BitstreamError("streams: unknown stream id");
      p.id = static_cast<StreamId>(id);
      uint32_t len = r.u32();
      p.bytes = r.bytes(len);
      rec.streams.push_back(std::move(p));
    }
    validate_record(rec);
    c.records.push_back(std::move(rec));
  }
  if (r.remaining() != 0) throw BitstreamError("trailing: bytes after last record");
  return c;
}

namespace {

// Reads one whitespace-terminated token; returns false at end of line.
bool next_token(const std::string& line, size_t& pos, std::string& tok) {
  while (pos < line.size() && line[pos] == ' ') ++pos;
  if (pos >= line.size()) return false;
  size_t start = pos;
  while (pos < line.size() && line[pos] != ' ') ++pos;
  tok = line.substr(start, pos - start);
  return true;
}

long parse_positive(const std::string& s, const char* what) {
  if (s.empty()) throw IoError(std::string(what) + ": missing value");
  for (char ch : s)
    if (ch < '0' || ch > '9') throw IoError(std::string(what) + ": not a number");
  long v = 0;
  for (char ch : s) {
    v = v * 10 + (ch - '0');
    if (v > 1 << 20) throw IoError(std::string(what) + ": out of range");
  }
  return v;
}

}  // namespace

std::vector<Frame> read_y4m(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw IoError("y4m: empty input");
  size_t pos = 0;
  std::string tok;
  if (!next_token(header, pos, tok) || tok != "YUV4MPEG2")
    throw IoError("y4m: missing YUV4MPEG2 signature");
  long width = 0, height = 0;
  bool mono = false;
  bool colorspace_seen = false;
  while (next_token(header, pos, tok)) {
    switch (tok[0]) {
      case 'W': width = parse_positive(tok.substr(1), "y4m width"); break;
      case 'H': height = parse_positive(tok.substr(1), "y4m height"); break;
      case 'C': {
        std::string cs = tok.substr(1);
        colorspace_seen = true;
        if (cs == "mono") {
          mono = true;
        } else if (cs == "420" || cs == "420jpeg" || cs == "420paldv" ||
                   cs == "420mpeg2") {
          mono = false;
        } else {
          throw IoError("y4m colorspace: unsupported C" + cs);
        }
        break;
      }
      default: break;  // frame rate, aspect, interlacing: ignored
    }
  }
  (void)colorspace_seen;  // absent C tag defaults to C420 per convention
  if (width <= 0) throw IoError("y4m width: must be positive");
  if (height <= 0) throw IoError("y4m height: must be positive");
  if (!mono && ((width & 1) || (height & 1)))
    throw IoError("y4m dimensions: C420 requires even width and height");

  const size_t luma_size = static_cast<size_t>(width) * height;
  const size_t chroma_size = mono ? 0 : 2 * (static_cast<size_t>(width) / 2) * (height / 2);

  std::vector<Frame> frames;
  std::string frame_line;
  while (std::getline(in, frame_line)) {
    if (frame_line.empty() && in.eof()) break;
    size_t fpos = 0;
    std::string ftok;
    if (!next_token(frame_line, fpos, ftok) || ftok != "FRAME")
      throw IoError("y4m frame: expected FRAME marker");
    Frame f(static_cast<int>(width), static_cast<int>(height), 8);
    f.frame_index = static_cast<int>(frames.size());
    in.read(reinterpret_cast<char*>(f.plane.data()), static_cast<std::streamsize>(luma_size));
    if (static_cast<size_t>(in.gcount()) != luma_size)
      throw IoError("y4m frame: truncated luma plane");
    if (chroma_size > 0) {
      in.ignore(static_cast<std::streamsize>(chroma_size));
      if (static_cast<size_t>(in.gcount()) != chroma_size)
        throw IoError("y4m frame: truncated chroma planes");
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<Frame> read_y4m_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("open: cannot read " + path);
  return read_y4m(in);
}

void write_y4m(std::ostream& out, const std::vector<Frame>& frames) {
  if (frames.empty()) throw IoError("y4m write: no frames");
  const Frame& first = frames[0];
  out << "YUV4MPEG2 W" << first.width << " H" << first.height
      << " F25:1 Ip A1:1 Cmono\n";
  for (const Frame& f : frames) {
    if (!f.same_geometry(first)) throw IoError("y4m write: mixed frame geometry");
    out << "FRAME\n";
    out.write(reinterpret_cast<const char*>(f.plane.data()),
              static_cast<std::streamsize>(f.plane.size()));
  }
  if (!out) throw IoError("y4m write: stream failure");
}

void write_y4m_file(const std::string& path, const std::vector<Frame>& frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("open: cannot write " + path);
  write_y4m(out, frames);
}

}  // namespace civc::io
