// Shared test fixtures: independent numeric oracles and deterministic
// content generators. Oracles are written against first principles, not
// against the library, so they can arbitrate.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "civc/core.hpp"

namespace testutil {

// Mass of N(mu, sigma^2) over [a, b] by composite Simpson in x-space.
// With n = 8192 panels the quadrature error stays below 1e-7 even at
// sigma = 0.01, well inside the 1e-6 oracle tolerance used by tests.
inline double gauss_mass(double mu, double sigma, double a, double b,
                         int n = 8192) {
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::acos(-1.0)));
  auto pdf = [&](double x) {
    double z = (x - mu) / sigma;
    return norm * std::exp(-0.5 * z * z);
  };
  const double h = (b - a) / n;
  double sum = pdf(a) + pdf(b);
  for (int i = 1; i < n; ++i) sum += pdf(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

// Mass of the +-0.5 window around mu; the quantity the skip decision and
// ideal_rate are built from.
inline double unit_window_mass(double mu, double sigma) {
  return gauss_mass(mu, sigma, mu - 0.5, mu + 0.5);
}

// Direct-evaluation orthonormal DCT-II oracle for an NxN block, long
// double accumulation. Independent of the frozen basis tables.
inline std::vector<double> dct2d_oracle(const std::vector<double>& block, int n) {
  const long double pi = std::acos(-1.0L);
  auto basis = [&](int k, int j) -> long double {
    long double scale = k == 0 ? std::sqrt(1.0L / n) : std::sqrt(2.0L / n);
    return scale * std::cos(pi * (2.0L * j + 1.0L) * k / (2.0L * n));
  };
  std::vector<double> out(static_cast<size_t>(n) * n, 0.0);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      long double acc = 0.0L;
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
          acc += basis(u, y) * basis(v, x) *
                 static_cast<long double>(block[static_cast<size_t>(y) * n + x]);
      out[static_cast<size_t>(u) * n + v] = static_cast<double>(acc);
    }
  return out;
}

inline civc::Frame random_frame(int width, int height, uint32_t seed) {
  civc::Frame f(width, height, 8);
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> dist(0, 255);
  for (auto& s : f.plane) s = static_cast<uint8_t>(dist(rng));
  return f;
}

// Circular shift by (dx, dy): output(x, y) = input((x - dx) mod w, (y - dy) mod h),
// i.e. content moves right by dx and down by dy.
inline civc::Frame shift_frame(const civc::Frame& src, int dx, int dy) {
  civc::Frame out(src.width, src.height, src.bitdepth);
  auto wrap = [](int v, int m) { return ((v % m) + m) % m; };
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x)
      out.at(y, x) = src.at(wrap(y - dy, src.height), wrap(x - dx, src.width));
  return out;
}

// Smooth, textured content: coarse random texture upsampled bilinearly so
// block matching has gradients to lock onto while staying compressible.
inline civc::Frame textured_frame(int width, int height, uint32_t seed) {
  const int cw = 8, ch = 8;
  int gw = (width + cw - 1) / cw + 2, gh = (height + ch - 1) / ch + 2;
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> dist(16, 240);
  std::vector<int> grid(static_cast<size_t>(gw) * gh);
  for (auto& g : grid) g = dist(rng);
  civc::Frame f(width, height, 8);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double gx = static_cast<double>(x) / cw, gy = static_cast<double>(y) / ch;
      int x0 = static_cast<int>(gx), y0 = static_cast<int>(gy);
      double fx = gx - x0, fy = gy - y0;
      auto g = [&](int yy, int xx) {
        return static_cast<double>(grid[static_cast<size_t>(yy) * gw + xx]);
      };
      double v = (1 - fy) * ((1 - fx) * g(y0, x0) + fx * g(y0, x0 + 1)) +
                 fy * ((1 - fx) * g(y0 + 1, x0) + fx * g(y0 + 1, x0 + 1));
      f.at(y, x) = static_cast<uint8_t>(std::lround(v));
    }
  return f;
}

// Adds +-amp uniform noise, clamped; fresh noise per seed. Used to build
// drift-provoking sequences.
inline civc::Frame add_noise(const civc::Frame& src, int amp, uint32_t seed) {
  civc::Frame out = src;
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> dist(-amp, amp);
  for (auto& s : out.plane) {
    int v = static_cast<int>(s) + dist(rng);
    s = static_cast<uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
  }
  return out;
}

}  // namespace testutil
