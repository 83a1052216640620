// Copyright (c) 2026 the civc authors
// SPDX-License-Identifier: Apache-2.0

#include "civc/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "civc/entropy.hpp"

namespace civc::eval {

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

// Fixed-width decimal or "inf"; CSV consumers should not see "nan".
std::string fmt_psnr(double v) {
  if (std::isinf(v)) return "inf";
  return fmt("%.6f", v);
}

// Runs fn(0..n-1) on up to thread_cap() workers. Results must be written
// to index-addressed slots by the caller so ordering stays deterministic.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
  int workers = std::min(thread_cap(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// --- BD-rate internals -----------------------------------------------------
//
// Monotone piecewise-cubic (Fritsch-Carlson) interpolation of y = ln(bpp)
// over x = psnr, integrated with two-point Gauss-Legendre per segment.
// Two nodes integrate cubics exactly, so equal curves cancel exactly.

struct Curve {
  std::vector<double> x;  // psnr, strictly increasing
  std::vector<double> y;  // ln(bpp)
  std::vector<double> m;  // endpoint slopes per knot
};

double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

Curve build_curve(std::vector<RDPoint> pts, const char* which) {
  if (pts.size() < 4)
    throw ConfigError(std::string("rd_points: ") + which +
                      " curve needs at least 4 points");
  std::sort(pts.begin(), pts.end(),
            [](const RDPoint& a, const RDPoint& b) { return a.psnr < b.psnr; });
  Curve c;
  for (const RDPoint& p : pts) {
    if (!std::isfinite(p.psnr) || !std::isfinite(p.bpp) || p.bpp <= 0.0)
      throw ConfigError(std::string("rd_points: ") + which +
                        " curve has a non-finite or non-positive point");
    c.x.push_back(p.psnr);
    c.y.push_back(std::log(p.bpp));
  }
  size_t n = c.x.size();
  for (size_t i = 0; i + 1 < n; ++i) {
    if (!(c.x[i] < c.x[i + 1]) || !(c.y[i] < c.y[i + 1]))
      throw ConfigError(std::string("rd_points: ") + which +
                        " curve must increase strictly in both psnr and bpp");
  }

  std::vector<double> h(n - 1), d(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    h[i] = c.x[i + 1] - c.x[i];
    d[i] = (c.y[i + 1] - c.y[i]) / h[i];
  }
  c.m.assign(n, 0.0);
  for (size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] * d[i] <= 0.0) {
      c.m[i] = 0.0;
    } else {
      double w1 = 2.0 * h[i] + h[i - 1];
      double w2 = h[i] + 2.0 * h[i - 1];
      c.m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }
  // Non-centered three-point endpoint slopes with the usual shape limits.
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (sign(m) != sign(d0)) return 0.0;
    if (sign(d0) != sign(d1) && std::abs(m) > 3.0 * std::abs(d0))
      return 3.0 * d0;
    return m;
  };
  c.m[0] = end_slope(h[0], h[1], d[0], d[1]);
  c.m[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  return c;
}

double hermite(const Curve& c, size_t i, double t) {
  double h = c.x[i + 1] - c.x[i];
  double s = (t - c.x[i]) / h;
  double s2 = s * s, s3 = s2 * s;
  double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  double h10 = s3 - 2.0 * s2 + s;
  double h01 = -2.0 * s3 + 3.0 * s2;
  double h11 = s3 - s2;
  return h00 * c.y[i] + h10 * h * c.m[i] + h01 * c.y[i + 1] + h11 * h * c.m[i + 1];
}

double integrate(const Curve& c, double lo, double hi) {
  // abscissa offset for 2-point Gauss-Legendre on [-1, 1]
  const double g = 1.0 / std::sqrt(3.0);
  double total = 0.0;
  for (size_t i = 0; i + 1 < c.x.size(); ++i) {
    double a = std::max(lo, c.x[i]);
    double b = std::min(hi, c.x[i + 1]);
    if (!(a < b)) continue;
    double mid = 0.5 * (a + b);
    double half = 0.5 * (b - a);
    total += half * (hermite(c, i, mid - half * g) + hermite(c, i, mid + half * g));
  }
  return total;
}

const char* stream_kind_name(io::StreamId id) {
  switch (id) {
    case io::StreamId::Image: return "image";
    case io::StreamId::Motion: return "motion";
    case io::StreamId::Residual: return "residual";
  }
  return "unknown";
}

}  // namespace

double psnr(const Frame& a, const Frame& b) {
  if (!a.same_geometry(b)) throw std::invalid_argument("psnr: geometry mismatch");
  int64_t sse = 0;
  for (size_t i = 0; i < a.plane.size(); ++i) {
    int64_t d = static_cast<int64_t>(a.plane[i]) - static_cast<int64_t>(b.plane[i]);
    sse += d * d;
  }
  if (sse == 0) return std::numeric_limits<double>::infinity();
  double mse = static_cast<double>(sse) / static_cast<double>(a.plane.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double bd_rate(const std::vector<RDPoint>& anchor, const std::vector<RDPoint>& test) {
  Curve ca = build_curve(anchor, "anchor");
  Curve ct = build_curve(test, "test");
  double lo = std::max(ca.x.front(), ct.x.front());
  double hi = std::min(ca.x.back(), ct.x.back());
  if (!(lo < hi)) throw ConfigError("rd_points: psnr ranges do not overlap");
  double avg_diff = (integrate(ct, lo, hi) - integrate(ca, lo, hi)) / (hi - lo);
  return (std::exp(avg_diff) - 1.0) * 100.0;
}

std::vector<FrameStats> analyze_drift(const std::vector<Frame>& frames,
                                      const CodecConfig& cfg,
                                      codec::SchedulePolicy policy) {
  CodecConfig checked = validate_config(cfg);
  if (frames.size() < 2 * static_cast<size_t>(checked.gop_size))
    throw ConfigError("frames: drift analysis needs at least 2*gop_size frames");
  return codec::encode_sequence(frames, checked, policy).stats;
}

std::vector<SkipRow> analyze_skip(const std::vector<Frame>& frames,
                                  const CodecConfig& base,
                                  const std::vector<int>& qualities) {
  if (qualities.empty()) throw ConfigError("qualities: empty sweep");
  CodecConfig checked = validate_config(base);

  int n = static_cast<int>(qualities.size());
  std::vector<codec::EncodeResult> encoded(static_cast<size_t>(n));
  parallel_for(n, [&](int i) {
    CodecConfig cfg = checked;
    cfg.quality_index = qualities[static_cast<size_t>(i)];
    encoded[static_cast<size_t>(i)] = codec::encode_sequence(
        frames, cfg, codec::SchedulePolicy::Full, /*want_traces=*/true);
  });

  // Everything below is timing-sensitive and runs on this thread only.
  struct Item {
    const codec::StreamTrace* trace;
    entropy::LatentGrid plain;   // quantized with skipping forced off
    entropy::SkipMask no_skip;
  };
  std::vector<SkipRow> rows;
  uint64_t sink = 0;
  for (int qi = 0; qi < n; ++qi) {
    const codec::EncodeResult& res = encoded[static_cast<size_t>(qi)];
    for (io::StreamId kind : {io::StreamId::Motion, io::StreamId::Residual,
                              io::StreamId::Image}) {
      std::vector<Item> items;
      int64_t skipped = 0, total = 0;
      for (const codec::FrameTrace& ft : res.traces) {
        for (const codec::StreamTrace& st : ft.streams) {
          if (st.id != kind) continue;
          auto [plain, no_skip] = entropy::apply_skip(st.raw, st.model, 0.0f);
          items.push_back({&st, std::move(plain), std::move(no_skip)});
          skipped += st.mask.count_skipped();
          total += static_cast<int64_t>(st.raw.values.size());
        }
      }
      if (items.empty()) continue;

      auto timed = [&](bool with_skip) {
        double runs[3];
        for (double& run : runs) {
          auto t0 = std::chrono::steady_clock::now();
          for (const Item& item : items) {
            const codec::StreamTrace& st = *item.trace;
            std::vector<uint8_t> payload =
                with_skip ? entropy::encode_latents(st.coded, st.model, st.mask)
                          : entropy::encode_latents(item.plain, st.model,
                                                    item.no_skip);
            float tau = with_skip ? checked.tau_sigma : 0.0f;
            entropy::LatentGrid back =
                entropy::decode_latents(payload, st.model, tau, st.raw.shape);
            sink += payload.size() + back.values.size();
          }
          auto t1 = std::chrono::steady_clock::now();
          run = std::chrono::duration<double, std::milli>(t1 - t0).count();
        }
        std::sort(std::begin(runs), std::end(runs));
        return runs[1];
      };

      SkipRow row;
      row.quality = qualities[static_cast<size_t>(qi)];
      row.stream = stream_kind_name(kind);
      row.skip_ratio = total == 0 ? 0.0
                                  : static_cast<double>(skipped) /
                                        static_cast<double>(total);
      row.time_with_skip_ms = timed(true);
      row.time_without_skip_ms = timed(false);
      rows.push_back(std::move(row));
    }
  }
  if (sink == 0xFFFFFFFFFFFFFFFFull) std::abort();  // keep the work observable
  return rows;
}

std::vector<RdRow> analyze_rd(const std::vector<Frame>& frames,
                              const CodecConfig& base,
                              const std::vector<int>& qualities) {
  if (qualities.empty()) throw ConfigError("qualities: empty sweep");
  if (frames.empty()) throw IoError("frames: empty sequence");
  CodecConfig checked = validate_config(base);

  int n = static_cast<int>(qualities.size());
  std::vector<RdRow> rows(static_cast<size_t>(n));
  parallel_for(n, [&](int i) {
    CodecConfig cfg = checked;
    cfg.quality_index = qualities[static_cast<size_t>(i)];
    codec::EncodeResult res =
        codec::encode_sequence(frames, cfg, codec::SchedulePolicy::Full);
    int64_t bits = 0;
    double psnr_sum = 0.0;
    for (const FrameStats& fs : res.stats) {
      bits += fs.bits;
      psnr_sum += fs.psnr;
    }
    double pixels = static_cast<double>(frames.size()) *
                    static_cast<double>(frames[0].width) *
                    static_cast<double>(frames[0].height);
    RdRow& row = rows[static_cast<size_t>(i)];
    row.quality = cfg.quality_index;
    row.bpp = static_cast<double>(bits) / pixels;
    row.psnr = psnr_sum / static_cast<double>(res.stats.size());
  });
  return rows;
}

std::string drift_csv(const std::vector<FrameStats>& rows) {
  std::string out = "frame_index,frame_type,bits,psnr\n";
  for (const FrameStats& r : rows) {
    out += std::to_string(r.frame_index);
    out += ',';
    out += frame_type_name(r.type);
    out += ',';
    out += std::to_string(r.bits);
    out += ',';
    out += fmt_psnr(r.psnr);
    out += '\n';
  }
  return out;
}

std::string skip_csv(const std::vector<SkipRow>& rows) {
  std::string out = "quality,stream,skip_ratio,time_with_skip_ms,time_without_skip_ms\n";
  for (const SkipRow& r : rows) {
    out += std::to_string(r.quality);
    out += ',';
    out += r.stream;
    out += ',';
    out += fmt("%.6f", r.skip_ratio);
    out += ',';
    out += fmt("%.3f", r.time_with_skip_ms);
    out += ',';
    out += fmt("%.3f", r.time_without_skip_ms);
    out += '\n';
  }
  return out;
}

std::string rd_csv(const std::vector<RdRow>& rows) {
  std::string out = "quality,bpp,psnr,msssim\n";
  for (const RdRow& r : rows) {
    out += std::to_string(r.quality);
    out += ',';
    out += fmt("%.6f", r.bpp);
    out += ',';
    out += fmt_psnr(r.psnr);
    out += ",\n";
  }
  return out;
}

int thread_cap() {
  if (const char* env = std::getenv("CIVC_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024)
      return static_cast<int>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace civc::eval
