// Copyright (c) 2026 the civc authors
// SPDX-License-Identifier: Apache-2.0

#include "civc/cli.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "civc/codec.hpp"
#include "civc/core.hpp"
#include "civc/eval.hpp"
#include "civc/io.hpp"

namespace civc::cli {

namespace {

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("input: cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("input: read failure on " + path);
  return bytes;
}

void write_file(const std::string& path, const void* data, size_t size) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("output: cannot open " + path);
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  out.flush();
  if (!out) throw IoError("output: write failure on " + path);
}

codec::SchedulePolicy to_policy(const std::string& name) {
  if (name == "full") return codec::SchedulePolicy::Full;
  if (name == "p-only") return codec::SchedulePolicy::POnly;
  if (name == "ci-only") return codec::SchedulePolicy::CIOnly;
  throw ConfigError("schedule: unknown variant " + name);
}

// Shared encode/analyze knobs; defaults come from CodecConfig so the CLI
// and the library cannot drift apart.
struct ConfigFlags {
  int quality;
  int gop;
  float tau;
  bool no_skip = false;

  ConfigFlags() {
    CodecConfig d;
    quality = d.quality_index;
    gop = d.gop_size;
    tau = d.tau_sigma;
  }

  CodecConfig to_config() const {
    CodecConfig cfg;
    cfg.quality_index = quality;
    cfg.gop_size = gop;
    cfg.tau_sigma = no_skip ? 0.0f : tau;
    return cfg;
  }

  void attach(CLI::App& cmd) {
    cmd.add_option("--quality", quality, "Quality index into the step table");
    cmd.add_option("--gop", gop, "Frames between refresh frames");
    cmd.add_option("--tau-sigma", tau, "Entropy skip threshold");
    cmd.add_flag("--no-skip", no_skip, "Disable entropy skipping (tau = 0)");
  }
};

std::string db_text(double v) {
  if (std::isinf(v)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void print_summary(std::ostream& err, const std::vector<FrameStats>& stats,
                   int width, int height) {
  struct Agg {
    int frames = 0;
    int64_t bits = 0;
    double psnr_sum = 0.0;
  };
  std::map<FrameType, Agg> per_type;
  Agg total;
  for (const FrameStats& fs : stats) {
    Agg& a = per_type[fs.type];
    a.frames += 1;
    a.bits += fs.bits;
    a.psnr_sum += fs.psnr;
    total.frames += 1;
    total.bits += fs.bits;
    total.psnr_sum += fs.psnr;
  }
  double pixels_per_frame = static_cast<double>(width) * height;
  auto line = [&](const char* label, const Agg& a) {
    if (a.frames == 0) return;
    double bpp = static_cast<double>(a.bits) / (a.frames * pixels_per_frame);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", bpp);
    err << "  " << label << " : " << a.frames << " frame(s), " << a.bits
        << " bits, " << buf << " bpp, " << db_text(a.psnr_sum / a.frames)
        << " dB\n";
  };
  err << "frame summary:\n";
  line("I", per_type[FrameType::I]);
  line("P", per_type[FrameType::P]);
  line("cI", per_type[FrameType::CI]);
  line("total", total);
}

int run_guarded(std::ostream& err, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const BitstreamError& e) {
    err << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"civc: feature-space video codec with entropy skipping"};
  app.require_subcommand(1);

  const std::vector<std::string> schedules = {"full", "p-only", "ci-only"};
  const std::vector<std::string> modes = {"drift", "skip", "rd"};

  // encode
  CLI::App* enc = app.add_subcommand("encode", "Encode a Y4M clip to a container");
  std::string enc_in, enc_out, enc_schedule = "full";
  ConfigFlags enc_flags;
  enc->add_option("input", enc_in, "Input .y4m path")->required();
  enc->add_option("output", enc_out, "Output container path")->required();
  enc_flags.attach(*enc);
  enc->add_option("--schedule", enc_schedule, "Frame schedule variant")
      ->check(CLI::IsMember(schedules));

  // decode
  CLI::App* dec = app.add_subcommand("decode", "Decode a container to Y4M");
  std::string dec_in, dec_out;
  dec->add_option("input", dec_in, "Input container path")->required();
  dec->add_option("output", dec_out, "Output .y4m path")->required();

  // analyze
  CLI::App* ana = app.add_subcommand("analyze", "Emit a CSV report for a clip");
  std::string ana_in, ana_out, ana_mode = "drift", ana_schedule = "full";
  std::vector<int> ana_qualities = {0, 1, 2, 3, 4, 5};
  ConfigFlags ana_flags;
  ana->add_option("input", ana_in, "Input .y4m path")->required();
  ana->add_option("--mode", ana_mode, "Report kind")
      ->check(CLI::IsMember(modes));
  ana->add_option("--out", ana_out, "Write the CSV here instead of stdout");
  ana->add_option("--schedule", ana_schedule, "Schedule variant (drift mode)")
      ->check(CLI::IsMember(schedules));
  ana->add_option("--qualities", ana_qualities,
                  "Quality sweep for skip/rd modes, e.g. 0,2,4")
      ->delimiter(',');
  ana_flags.attach(*ana);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  if (enc->parsed()) {
    return run_guarded(err, [&] {
      std::vector<Frame> frames = io::read_y4m_file(enc_in);
      codec::EncodeResult result = codec::encode_sequence(
          frames, enc_flags.to_config(), to_policy(enc_schedule));
      write_file(enc_out, result.bytes.data(), result.bytes.size());
      print_summary(err, result.stats, frames[0].width, frames[0].height);
    });
  }
  if (dec->parsed()) {
    return run_guarded(err, [&] {
      std::vector<Frame> frames = codec::decode_sequence(read_file(dec_in));
      if (frames.empty()) throw BitstreamError("frame_count: empty sequence");
      io::write_y4m_file(dec_out, frames);
      err << "decoded " << frames.size() << " frame(s)\n";
    });
  }
  return run_guarded(err, [&] {
    std::vector<Frame> frames = io::read_y4m_file(ana_in);
    CodecConfig cfg = ana_flags.to_config();
    std::string csv;
    if (ana_mode == "drift") {
      csv = eval::drift_csv(
          eval::analyze_drift(frames, cfg, to_policy(ana_schedule)));
    } else if (ana_mode == "skip") {
      csv = eval::skip_csv(eval::analyze_skip(frames, cfg, ana_qualities));
    } else {
      csv = eval::rd_csv(eval::analyze_rd(frames, cfg, ana_qualities));
    }
    if (ana_out.empty()) {
      out << csv;
    } else {
      write_file(ana_out, csv.data(), csv.size());
    }
  });
}

}  // namespace civc::cli
