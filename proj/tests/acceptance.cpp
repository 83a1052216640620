// Acceptance gate: one check per release criterion, one PASS/FAIL line
// each, exit code = number of failures. Tolerances are pinned here and are
// not configurable; loosening them is a release decision, not a test edit.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "civc/codec.hpp"
#include "civc/entropy.hpp"
#include "civc/eval.hpp"
#include "civc/motion.hpp"
#include "civc/transforms.hpp"
#include "test_util.hpp"

using namespace civc;
using entropy::GaussianModel;
using entropy::LatentGrid;
using entropy::Shape3;
using entropy::SkipMask;

namespace {

struct Result {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(const char* f, ...) {
  char buf[256];
  va_list ap;
  va_start(ap, f);
  vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// Optimization sink so timed coding loops cannot be elided.
volatile double g_sink = 0.0;

// Fuzzed (value, mu, sigma) triples: log-uniform sigma over the full
// supported range, values a few sigma out, with occasional far outliers
// that must saturate into the coding window.
void fuzz_fill(LatentGrid& raw, GaussianModel& model, std::mt19937& rng) {
  std::uniform_real_distribution<double> mu_d(-20.0, 20.0);
  std::uniform_real_distribution<double> ls(std::log(0.01), std::log(64.0));
  std::uniform_real_distribution<double> spread(-4.0, 4.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  size_t n = raw.shape.size();
  model.shape = raw.shape;
  raw.values.resize(n);
  model.mu.resize(n);
  model.sigma.resize(n);
  for (size_t i = 0; i < n; ++i) {
    double mu = mu_d(rng);
    double sigma = std::exp(ls(rng));
    double v = mu + sigma * spread(rng);
    if (unit(rng) < 0.01) v = mu + (unit(rng) < 0.5 ? 5000.0 : -5000.0);
    model.mu[i] = static_cast<float>(mu);
    model.sigma[i] = static_cast<float>(sigma);
    raw.values[i] = static_cast<float>(v);
  }
}

double median_seconds(int runs, const std::function<void()>& body) {
  std::vector<double> t;
  for (int r = 0; r < runs; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    body();
    t.push_back(seconds_since(t0));
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

// 1. The closed-form unit-bin mass agrees with numeric integration of the
// Gaussian density over [mu - 0.5, mu + 0.5].
Result c01_unit_bin_mass() {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> mu_d(-50.0, 50.0);
  std::uniform_real_distribution<double> ls(std::log(0.01), std::log(64.0));
  auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double mu = mu_d(rng);
    double sigma = std::exp(ls(rng));
    double got = entropy::mode_and_mass(mu, sigma).second;
    double want = testutil::unit_window_mass(mu, sigma);
    worst = std::max(worst, std::fabs(got - want));
  }
  double secs = seconds_since(t0);
  Result r;
  r.pass = worst <= 1e-6 && secs < 1.0;
  r.detail = fmt("max |err| %.3g over 1000 pairs, %.2f s", worst, secs);
  return r;
}

// 2. One million fuzzed elements survive encode -> decode bit-exactly,
// skip replacements included, within the time budget.
Result c02_round_trip() {
  LatentGrid raw;
  raw.shape = {16, 250, 250};  // exactly 1e6 elements
  GaussianModel model;
  std::mt19937 rng(22);
  fuzz_fill(raw, model, rng);

  auto t0 = std::chrono::steady_clock::now();
  auto [coded, mask] = entropy::apply_skip(raw, model, 0.16f);
  std::vector<uint8_t> payload = entropy::encode_latents(coded, model, mask);
  LatentGrid decoded = entropy::decode_latents(payload, model, 0.16f, raw.shape);
  double secs = seconds_since(t0);

  bool exact = decoded.values == coded.values && decoded.shape == coded.shape;
  Result r;
  r.pass = exact && secs < 10.0;
  r.detail = fmt("%sexact, %.1f%% skipped, %zu payload bytes, %.2f s",
                 exact ? "" : "NOT ", 100.0 * mask.count_skipped() / 1e6,
                 payload.size(), secs);
  return r;
}

// 3. Measured payload bits track the ideal rate within 2% plus 64 bits on
// million-element grids, from near-deterministic to near-uniform sigma.
Result c03_coder_efficiency() {
  const Shape3 shape{16, 250, 250};
  struct Regime {
    const char* name;
    float sigma_lo, sigma_hi;  // log-uniform; equal bounds mean constant
    float tau;
  };
  // The coder spends a structural ~0.011 bits per coded element keeping the
  // 511-bin window's per-bin floor in a 16-bit CDF.  A 2% relative budget
  // therefore needs the ideal rate to average >= ~0.56 bits/element, which
  // holds for sigma >= 0.5 (ideal ~1.05 bits); narrower constant regimes are
  // excluded and narrow draws are exercised via the skip path instead.
  const Regime regimes[] = {
      {"sigma=0.5", 0.5f, 0.5f, 0.0f},  {"sigma=1", 1.0f, 1.0f, 0.0f},
      {"sigma=4", 4.0f, 4.0f, 0.0f},    {"sigma=16", 16.0f, 16.0f, 0.0f},
      {"sigma=60", 60.0f, 60.0f, 0.0f}, {"mixed", 0.5f, 64.0f, 0.0f},
      {"mixed+skip", 0.01f, 64.0f, 0.16f},
  };
  std::mt19937 rng(33);
  std::uniform_real_distribution<double> mu_d(-10.0, 10.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst_margin = -1e300;  // signed distance to the budget; <0 passes
  std::string worst_name = "-";
  bool all_ok = true;
  for (const Regime& reg : regimes) {
    LatentGrid raw;
    raw.shape = shape;
    GaussianModel model;
    model.shape = shape;
    size_t n = shape.size();
    raw.values.resize(n);
    model.mu.resize(n);
    model.sigma.resize(n);
    std::uniform_real_distribution<double> ls(std::log(reg.sigma_lo),
                                              std::log(reg.sigma_hi));
    for (size_t i = 0; i < n; ++i) {
      double sigma = reg.sigma_lo == reg.sigma_hi ? reg.sigma_lo
                                                  : std::exp(ls(rng));
      double mu = mu_d(rng);
      model.mu[i] = static_cast<float>(mu);
      model.sigma[i] = static_cast<float>(sigma);
      raw.values[i] = static_cast<float>(mu + sigma * gauss(rng));
    }
    auto [coded, mask] = entropy::apply_skip(raw, model, reg.tau);
    double measured =
        8.0 * static_cast<double>(
                  entropy::encode_latents(coded, model, mask).size());
    double ideal = entropy::ideal_rate(coded, model, mask);
    double budget = 0.02 * ideal + 64.0;
    double margin = std::fabs(measured - ideal) - budget;
    if (margin > worst_margin) {
      worst_margin = margin;
      worst_name = reg.name;
    }
    if (margin > 0.0) all_ok = false;
  }
  Result r;
  r.pass = all_ok;
  r.detail = fmt("7 regimes, tightest is %s (%.0f bits %s budget)",
                 worst_name.c_str(), std::fabs(worst_margin),
                 worst_margin > 0.0 ? "OVER" : "under");
  return r;
}

// 4. The skip mask is a pure function of (sigma, tau): the mask the encoder
// commits to and the one the decoder recomputes agree element-wise.
Result c04_mask_parity() {
  std::mt19937 rng(44);
  std::uniform_real_distribution<float> tau_d(0.0f, 1.0f);
  int bad = 0;
  for (int m = 0; m < 1000; ++m) {
    LatentGrid raw;
    raw.shape = {1, 16, 16};
    GaussianModel model;
    fuzz_fill(raw, model, rng);
    float tau = (m % 10 == 0) ? 0.0f : tau_d(rng);
    auto [coded, enc_mask] = entropy::apply_skip(raw, model, tau);
    SkipMask dec_mask = entropy::compute_skip_mask(model, tau);
    if (dec_mask.skip != enc_mask.skip) ++bad;
    std::vector<uint8_t> payload =
        entropy::encode_latents(coded, model, enc_mask);
    LatentGrid decoded =
        entropy::decode_latents(payload, model, tau, raw.shape);
    if (decoded.values != coded.values) ++bad;
  }
  Result r;
  r.pass = bad == 0;
  r.detail = fmt("%d/1000 models disagreed", bad);
  return r;
}

// 5. With at least 90% of elements skipped, median entropy encode+decode
// time is at most half the no-skip time on the same grid.
Result c05_skip_speed() {
  LatentGrid raw;
  raw.shape = {16, 250, 250};
  GaussianModel model;
  model.shape = raw.shape;
  size_t n = raw.shape.size();
  raw.values.resize(n);
  model.mu.resize(n);
  model.sigma.resize(n);
  std::mt19937 rng(55);
  std::uniform_real_distribution<double> mu_d(-8.0, 8.0);
  std::normal_distribution<double> gauss(0.0, 2.0);
  for (size_t i = 0; i < n; ++i) {
    bool coded = (i % 13) == 0;  // 1/13 coded -> 92.3% skipped
    double mu = mu_d(rng);
    model.mu[i] = static_cast<float>(mu);
    model.sigma[i] = coded ? 2.0f : 0.05f;
    raw.values[i] = static_cast<float>(mu + (coded ? gauss(rng) : 0.0));
  }
  const float tau = 0.16f;
  auto [with_skip, mask] = entropy::apply_skip(raw, model, tau);
  auto [no_skip, mask0] = entropy::apply_skip(raw, model, 0.0f);
  double ratio_skipped = static_cast<double>(mask.count_skipped()) / n;

  auto run_pair = [&](const LatentGrid& g, const SkipMask& m, float t) {
    std::vector<uint8_t> payload = entropy::encode_latents(g, model, m);
    LatentGrid dec = entropy::decode_latents(payload, model, t, g.shape);
    g_sink = g_sink + dec.values[0] + static_cast<double>(payload.size());
  };
  double t_skip =
      median_seconds(5, [&] { run_pair(with_skip, mask, tau); });
  double t_full =
      median_seconds(5, [&] { run_pair(no_skip, mask0, 0.0f); });

  Result r;
  r.pass = ratio_skipped >= 0.90 && t_skip <= 0.5 * t_full;
  r.detail = fmt("%.1f%% skipped, %.1f ms vs %.1f ms (ratio %.2f)",
                 100.0 * ratio_skipped, 1e3 * t_skip, 1e3 * t_full,
                 t_full > 0 ? t_skip / t_full : 0.0);
  return r;
}

// 6. Skipping never enlarges a payload: against the same raw latents and
// model, every nonzero threshold codes at most as many bytes as tau = 0.
Result c06_skip_never_enlarges() {
  std::mt19937 rng(66);
  const float taus[] = {0.05f, 0.16f, 0.5f, 1.0f, 4.0f};
  int bad = 0;
  for (int k = 0; k < 60; ++k) {
    LatentGrid raw;
    raw.shape = {4, 24, 24};
    GaussianModel model;
    fuzz_fill(raw, model, rng);
    float tau = taus[k % 5];
    auto [on, mask_on] = entropy::apply_skip(raw, model, tau);
    auto [off, mask_off] = entropy::apply_skip(raw, model, 0.0f);
    size_t with = entropy::encode_latents(on, model, mask_on).size();
    size_t without = entropy::encode_latents(off, model, mask_off).size();
    if (with > without) ++bad;
  }
  Result r;
  r.pass = bad == 0;
  r.detail = fmt("%d/60 fuzz cases enlarged", bad);
  return r;
}

// 7. Block search recovers a known global (3,1) shift on textured frames,
// and per-cell refinement never worsens the alignment error.
Result c07_motion_recovery() {
  CodecConfig cfg;
  Frame ref = testutil::textured_frame(128, 96, 7);
  Frame cur = testutil::shift_frame(ref, 3, 1);

  MotionField flow = motion::estimate_pixel_flow(ref, cur, cfg.search_radius);
  int interior = 0, exact = 0;
  for (int r = 1; r + 1 < flow.rows; ++r)
    for (int c = 1; c + 1 < flow.cols; ++c) {
      ++interior;
      if (flow.at(r, c).dx == 3.0f && flow.at(r, c).dy == 1.0f) ++exact;
    }
  double hit = interior > 0 ? static_cast<double>(exact) / interior : 0.0;

  FeatureTensor ref_feat = transforms::extract_features(ref, cfg.feature_scale);
  FeatureTensor cur_feat = transforms::extract_features(cur, cfg.feature_scale);
  MotionField init = motion::init_feature_motion(flow, ref.height, ref.width,
                                                 cfg.feature_scale,
                                                 cfg.cell_size);
  MotionField refined =
      motion::refine_motion(init, ref_feat, cur_feat, cfg.refine_radius);

  auto cell_costs = [&](const MotionField& mf) {
    FeatureTensor aligned = motion::align(ref_feat, mf);
    std::vector<double> cost(static_cast<size_t>(mf.rows) * mf.cols, 0.0);
    for (int ch = 0; ch < aligned.channels; ++ch)
      for (int y = 0; y < aligned.height; ++y)
        for (int x = 0; x < aligned.width; ++x) {
          size_t cell = static_cast<size_t>(y / mf.cell_size) * mf.cols +
                        (x / mf.cell_size);
          cost[cell] +=
              std::fabs(aligned.at(ch, y, x) - cur_feat.at(ch, y, x));
        }
    return cost;
  };
  std::vector<double> before = cell_costs(init);
  std::vector<double> after = cell_costs(refined);
  int worse = 0;
  for (size_t i = 0; i < before.size(); ++i)
    if (after[i] > before[i] + 1e-6) ++worse;

  Result r;
  r.pass = hit >= 0.95 && worse == 0;
  r.detail = fmt("%.1f%% interior blocks exact, %d/%zu cells degraded",
                 100.0 * hit, worse, before.size());
  return r;
}

// 8. The gop-20 schedule types 41 frames as I at 0, cI at 20 and 40, P
// everywhere else.
Result c08_schedule() {
  int bad = 0;
  for (int i = 0; i < 41; ++i) {
    FrameType want = (i == 0) ? FrameType::I
                              : (i % 20 == 0 ? FrameType::CI : FrameType::P);
    if (codec::schedule(i, 20) != want) ++bad;
  }
  Result r;
  r.pass = bad == 0;
  r.detail = fmt("%d/41 frames mistyped", bad);
  return r;
}

// 9. With skipping off, a cI reconstruction is a pure function of the
// coded frame: different references change payload size only.  One
// reference per pair resembles the target and the other is unrelated, so
// the rate gap is structural (a good reference prices the stream near the
// skip ceiling) and the sizes can never tie by coincidence.
Result c09_ci_reference_invariance() {
  CodecConfig cfg;
  cfg.tau_sigma = 0.0f;
  int recon_diffs = 0, size_ties = 0;
  for (int k = 0; k < 50; ++k) {
    uint32_t seed = 1000 + 7 * static_cast<uint32_t>(k);
    Frame target = (k % 2 == 0) ? testutil::random_frame(32, 24, seed)
                                : testutil::textured_frame(32, 24, seed);
    Frame ref_good = testutil::add_noise(target, 2, seed + 1);
    Frame ref_bad = testutil::random_frame(32, 24, seed + 2);

    codec::CodecState sa(32, 24), sb(32, 24);
    codec::encode_i(ref_good, cfg, sa);
    codec::encode_i(ref_bad, cfg, sb);
    io::FrameRecord ra = codec::encode_ci(target, cfg, sa);
    io::FrameRecord rb = codec::encode_ci(target, cfg, sb);

    if (!(sa.recon == sb.recon)) ++recon_diffs;
    size_t bytes_a = 0, bytes_b = 0;
    for (const auto& s : ra.streams) bytes_a += s.bytes.size();
    for (const auto& s : rb.streams) bytes_b += s.bytes.size();
    if (bytes_a == bytes_b) ++size_ties;
  }
  Result r;
  r.pass = recon_diffs == 0 && size_ties == 0;
  r.detail = fmt("%d/50 reconstructions changed, %d/50 payload sizes tied",
                 recon_diffs, size_ties);
  return r;
}

// 10. On a panning scene with fresh per-frame noise, the refresh schedule
// holds cI frames at standalone quality while a P-only chain stays strictly
// below it at the same indices.  The separation is structural: a refreshed
// frame is coded from its own samples, but a P frame predicts through the
// previous reconstruction warped by one pixel -- a half-sample offset in
// feature space, so the prediction is bilinear-blurred and off the
// quantization lattice, and the chain keeps paying residual quantization
// error into every band.  A static scene would not do: with zero motion the
// prediction's coefficients are exact quantizer multiples, which makes P
// coding land on the same lattice point as standalone coding.
Result c10_drift_stability() {
  CodecConfig cfg;
  cfg.tau_sigma = 0.0f;
  Frame base = testutil::textured_frame(48, 32, 10);
  std::vector<Frame> frames;
  for (int i = 0; i < 60; ++i)
    frames.push_back(testutil::add_noise(testutil::shift_frame(base, i, 0), 4,
                                         500 + static_cast<uint32_t>(i)));

  codec::EncodeResult full =
      codec::encode_sequence(frames, cfg, codec::SchedulePolicy::Full);
  codec::EncodeResult ponly =
      codec::encode_sequence(frames, cfg, codec::SchedulePolicy::POnly);

  double worst_gap = 0.0;
  bool refreshed_matches = true, ponly_below = true;
  for (int idx : {20, 40}) {
    codec::EncodeResult solo =
        codec::encode_sequence({frames[static_cast<size_t>(idx)]}, cfg);
    double gap = std::fabs(full.stats[static_cast<size_t>(idx)].psnr -
                           solo.stats[0].psnr);
    worst_gap = std::max(worst_gap, gap);
    if (gap > 0.01) refreshed_matches = false;
    if (!(ponly.stats[static_cast<size_t>(idx)].psnr <
          full.stats[static_cast<size_t>(idx)].psnr))
      ponly_below = false;
  }
  Result r;
  r.pass = refreshed_matches && ponly_below;
  r.detail = fmt("refresh gap %.4f dB, P-only %s below at both refreshes",
                 worst_gap, ponly_below ? "strictly" : "NOT");
  return r;
}

// 11. Decoding reproduces the encoder's reconstructions bit-exactly and
// independent encodes of the same clip are byte-identical.
Result c11_determinism_parity() {
  std::vector<Frame> frames;
  Frame base = testutil::textured_frame(48, 32, 11);
  for (int i = 0; i < 3; ++i)
    frames.push_back(testutil::shift_frame(base, i, i % 2));

  codec::EncodeResult a = codec::encode_sequence(frames, CodecConfig{});
  codec::EncodeResult b = codec::encode_sequence(frames, CodecConfig{});
  std::vector<Frame> decoded = codec::decode_sequence(a.bytes);

  bool parity = decoded.size() == a.recons.size();
  for (size_t i = 0; parity && i < decoded.size(); ++i)
    parity = decoded[i] == a.recons[i];
  bool stable = a.bytes == b.bytes;

  Result r;
  r.pass = parity && stable;
  r.detail = fmt("parity %s, containers %s (%zu bytes)",
                 parity ? "exact" : "BROKEN",
                 stable ? "byte-identical" : "DIVERGED", a.bytes.size());
  return r;
}

// 12. bd_rate is exactly zero for a curve against itself and recovers an
// analytic uniform rate halving to within 0.1 percentage points.
Result c12_bd_rate() {
  std::vector<RDPoint> anchor = {
      {0.10, 30.0}, {0.22, 32.5}, {0.45, 34.5}, {0.90, 37.0}, {1.70, 39.0}};
  std::vector<RDPoint> half = anchor;
  for (auto& p : half) p.bpp *= 0.5;

  double self = eval::bd_rate(anchor, anchor);
  double halved = eval::bd_rate(anchor, half);

  Result r;
  r.pass = self == 0.0 && std::fabs(halved + 50.0) <= 0.1;
  r.detail = fmt("self %.17g%%, half-rate %.4f%%", self, halved);
  return r;
}

}  // namespace

int main() {
  struct Criterion {
    const char* label;
    Result (*fn)();
  };
  const Criterion table[] = {
      {"closed-form unit-bin mass matches numeric integration",
       c01_unit_bin_mass},
      {"1e6 fuzzed elements round-trip the entropy coder exactly",
       c02_round_trip},
      {"payload bits track ideal rate within 2% + 64 bits", c03_coder_efficiency},
      {"encoder/decoder skip masks agree on 1000 random models",
       c04_mask_parity},
      {"90%+ skip at least halves entropy coding time", c05_skip_speed},
      {"skipping never enlarges a payload", c06_skip_never_enlarges},
      {"block search recovers a (3,1) shift; refinement never hurts",
       c07_motion_recovery},
      {"gop-20 schedule types 41 frames as I/cI/P exactly", c08_schedule},
      {"cI reconstruction is reference-invariant with skip off",
       c09_ci_reference_invariance},
      {"periodic refresh restores standalone quality; P-only drifts",
       c10_drift_stability},
      {"decode parity and byte-identical re-encodes", c11_determinism_parity},
      {"bd-rate: zero on self, -50% on analytic half-rate", c12_bd_rate},
  };

  int failures = 0;
  int id = 0;
  for (const Criterion& c : table) {
    ++id;
    Result res;
    try {
      res = c.fn();
    } catch (const std::exception& e) {
      res.pass = false;
      res.detail = std::string("threw: ") + e.what();
    }
    if (!res.pass) ++failures;
    std::printf("criterion %2d: %s - %s (%s)\n", id,
                res.pass ? "PASS" : "FAIL", c.label, res.detail.c_str());
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
