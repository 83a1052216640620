// Copyright (c) 2026 the civc authors
// SPDX-License-Identifier: Apache-2.0

#include "civc/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace civc::transforms {

namespace {

#include "dct_tables.inc"

constexpr int kBlock = 8;

int round_up(int v, int multiple) { return (v + multiple - 1) / multiple * multiple; }

float clamp_sigma(float v, const PriorCoefficients& c) {
  return std::min(std::max(v, c.sigma_min), c.sigma_max);
}

void check_tensor(const FeatureTensor& t, const char* what) {
  if (t.channels <= 0 || t.height <= 0 || t.width <= 0 ||
      t.data.size() != static_cast<size_t>(t.channels) * t.height * t.width)
    throw std::invalid_argument(std::string("shape mismatch: ") + what);
}

entropy::Shape3 tensor_shape(const FeatureTensor& t) {
  return {t.channels, t.height, t.width};
}

// Forward/inverse 2D transform of one block. src/dst address the channel
// plane; the block starts at (by, bx) with extent bh x bw (1..8 each).
// Separable matrix products with double accumulators.
void dct_block(const float* plane, float* out, int width, int by, int bx,
               int bh, int bw, double inv_qstep) {
  const double(*dr)[8] = kDctBasis[bh - 1];
  const double(*dc)[8] = kDctBasis[bw - 1];
  double tmp[kBlock][kBlock];
  for (int u = 0; u < bh; ++u) {
    for (int x = 0; x < bw; ++x) {
      double acc = 0.0;
      for (int y = 0; y < bh; ++y)
        acc += dr[u][y] * plane[static_cast<size_t>(by + y) * width + (bx + x)];
      tmp[u][x] = acc;
    }
  }
  for (int u = 0; u < bh; ++u) {
    for (int v = 0; v < bw; ++v) {
      double acc = 0.0;
      for (int x = 0; x < bw; ++x) acc += tmp[u][x] * dc[v][x];
      out[static_cast<size_t>(by + u) * width + (bx + v)] =
          static_cast<float>(acc * inv_qstep);
    }
  }
}

void idct_block(const float* latents, float* plane, int width, int by, int bx,
                int bh, int bw, double qstep) {
  const double(*dr)[8] = kDctBasis[bh - 1];
  const double(*dc)[8] = kDctBasis[bw - 1];
  double tmp[kBlock][kBlock];
  for (int y = 0; y < bh; ++y) {
    for (int v = 0; v < bw; ++v) {
      double acc = 0.0;
      for (int u = 0; u < bh; ++u)
        acc += dr[u][y] * latents[static_cast<size_t>(by + u) * width + (bx + v)] * qstep;
      tmp[y][v] = acc;
    }
  }
  for (int y = 0; y < bh; ++y) {
    for (int x = 0; x < bw; ++x) {
      double acc = 0.0;
      for (int v = 0; v < bw; ++v) acc += tmp[y][v] * dc[v][x];
      plane[static_cast<size_t>(by + y) * width + (bx + x)] = static_cast<float>(acc);
    }
  }
}

template <typename Fn>
void for_each_block(int height, int width, Fn fn) {
  for (int by = 0; by < height; by += kBlock) {
    int bh = std::min(kBlock, height - by);
    for (int bx = 0; bx < width; bx += kBlock) {
      int bw = std::min(kBlock, width - bx);
      fn(by, bx, bh, bw);
    }
  }
}

}  // namespace

FeatureTensor extract_features(const Frame& frame, int scale) {
  if (scale < 1) throw std::invalid_argument("shape mismatch: scale must be >= 1");
  if (frame.width <= 0 || frame.height <= 0 ||
      frame.plane.size() != static_cast<size_t>(frame.width) * frame.height)
    throw std::invalid_argument("shape mismatch: frame plane");
  int pad_h = round_up(frame.height, 2 * scale);
  int pad_w = round_up(frame.width, 2 * scale);
  FeatureTensor feat(scale * scale, pad_h / scale, pad_w / scale, scale);
  for (int dy = 0; dy < scale; ++dy) {
    for (int dx = 0; dx < scale; ++dx) {
      int c = dy * scale + dx;
      for (int y = 0; y < feat.height; ++y) {
        int sy = std::min(y * scale + dy, frame.height - 1);
        for (int x = 0; x < feat.width; ++x) {
          int sx = std::min(x * scale + dx, frame.width - 1);
          feat.at(c, y, x) = static_cast<float>(frame.at(sy, sx));
        }
      }
    }
  }
  return feat;
}

Frame synthesize_frame(const FeatureTensor& feat, int width, int height) {
  check_tensor(feat, "feature tensor");
  int s = feat.scale;
  if (s < 1 || feat.channels != s * s ||
      feat.height * s != round_up(height, 2 * s) ||
      feat.width * s != round_up(width, 2 * s))
    throw std::invalid_argument("geometry mismatch: tensor does not cover frame");
  Frame out(width, height, 8);
  const float max_sample = 255.0f;
  for (int py = 0; py < height; ++py) {
    int fy = py / s;
    for (int px = 0; px < width; ++px) {
      int c = (py % s) * s + (px % s);
      float v = round_half_away(feat.at(c, fy, px / s));
      v = std::min(std::max(v, 0.0f), max_sample);
      out.at(py, px) = static_cast<uint8_t>(v);
    }
  }
  return out;
}

entropy::LatentGrid analysis(const FeatureTensor& feat, float qstep) {
  check_tensor(feat, "analysis input");
  if (!(qstep > 0.0f)) throw std::invalid_argument("qstep: must be positive");
  entropy::LatentGrid out;
  out.shape = tensor_shape(feat);
  out.values.resize(feat.size());
  const double inv_q = 1.0 / static_cast<double>(qstep);
  const size_t plane_size = static_cast<size_t>(feat.height) * feat.width;
  for (int c = 0; c < feat.channels; ++c) {
    const float* src = feat.data.data() + c * plane_size;
    float* dst = out.values.data() + c * plane_size;
    for_each_block(feat.height, feat.width, [&](int by, int bx, int bh, int bw) {
      dct_block(src, dst, feat.width, by, bx, bh, bw, inv_q);
    });
  }
  return out;
}

FeatureTensor synthesis(const entropy::LatentGrid& latents, float qstep) {
  if (latents.values.size() != latents.shape.size())
    throw std::invalid_argument("shape mismatch: latent buffer vs shape");
  if (!(qstep > 0.0f)) throw std::invalid_argument("qstep: must be positive");
  FeatureTensor out(latents.shape.channels, latents.shape.height, latents.shape.width);
  const size_t plane_size = static_cast<size_t>(out.height) * out.width;
  for (int c = 0; c < out.channels; ++c) {
    const float* src = latents.values.data() + c * plane_size;
    float* dst = out.data.data() + c * plane_size;
    for_each_block(out.height, out.width, [&](int by, int bx, int bh, int bw) {
      idct_block(src, dst, out.width, by, bx, bh, bw, static_cast<double>(qstep));
    });
  }
  return out;
}

std::vector<float> block_stddev(const FeatureTensor& src) {
  check_tensor(src, "block_stddev input");
  std::vector<float> out(src.size());
  const size_t plane_size = static_cast<size_t>(src.height) * src.width;
  for (int c = 0; c < src.channels; ++c) {
    const float* plane = src.data.data() + c * plane_size;
    float* dst = out.data() + c * plane_size;
    for_each_block(src.height, src.width, [&](int by, int bx, int bh, int bw) {
      double sum = 0.0, sum_sq = 0.0;
      for (int y = 0; y < bh; ++y) {
        for (int x = 0; x < bw; ++x) {
          double v = plane[static_cast<size_t>(by + y) * src.width + (bx + x)];
          sum += v;
          sum_sq += v * v;
        }
      }
      double n = static_cast<double>(bh) * bw;
      double var = std::max(0.0, sum_sq / n - (sum / n) * (sum / n));
      float sd = static_cast<float>(std::sqrt(var));
      for (int y = 0; y < bh; ++y)
        for (int x = 0; x < bw; ++x)
          dst[static_cast<size_t>(by + y) * src.width + (bx + x)] = sd;
    });
  }
  return out;
}

std::vector<float> cell_stddev(const FeatureTensor& feat, int cell_size,
                               int rows, int cols) {
  check_tensor(feat, "cell_stddev input");
  if (cell_size < 1 || rows < 1 || cols < 1 ||
      (rows - 1) * cell_size >= feat.height || (cols - 1) * cell_size >= feat.width)
    throw std::invalid_argument("shape mismatch: cell grid vs feature tensor");
  std::vector<float> out(static_cast<size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    int y0 = r * cell_size;
    int y1 = std::min(y0 + cell_size, feat.height);
    for (int cidx = 0; cidx < cols; ++cidx) {
      int x0 = cidx * cell_size;
      int x1 = std::min(x0 + cell_size, feat.width);
      double sum = 0.0, sum_sq = 0.0;
      for (int ch = 0; ch < feat.channels; ++ch) {
        for (int y = y0; y < y1; ++y) {
          for (int x = x0; x < x1; ++x) {
            double v = feat.at(ch, y, x);
            sum += v;
            sum_sq += v * v;
          }
        }
      }
      double n = static_cast<double>(feat.channels) * (y1 - y0) * (x1 - x0);
      double var = std::max(0.0, sum_sq / n - (sum / n) * (sum / n));
      out[static_cast<size_t>(r) * cols + cidx] = static_cast<float>(std::sqrt(var));
    }
  }
  return out;
}

namespace {

// Shared affine prior: mu = alpha * p, sigma = clamp(beta0 + beta1 * sbar'
// + beta2 * |p|). sbar' is the (possibly gain-scaled) structure statistic.
entropy::GaussianModel affine_prior(entropy::Shape3 shape,
                                    const std::vector<float>& sbar,
                                    const entropy::LatentGrid* prev,
                                    const PriorCoefficients& coeff,
                                    float structure_gain) {
  if (sbar.size() != shape.size())
    throw std::invalid_argument("shape mismatch: structure statistic vs latents");
  if (prev != nullptr && !(prev->shape == shape))
    throw std::invalid_argument("shape mismatch: previous latents vs latents");

  entropy::GaussianModel model;
  model.shape = shape;
  model.mu.resize(shape.size());
  model.sigma.resize(shape.size());
  for (size_t i = 0; i < model.mu.size(); ++i) {
    float p = prev != nullptr ? prev->values[i] : 0.0f;
    model.mu[i] = coeff.alpha * p;
    float structure = coeff.beta1 * (structure_gain * sbar[i]);
    float temporal = coeff.beta2 * std::fabs(p);
    model.sigma[i] = clamp_sigma((coeff.beta0 + structure) + temporal, coeff);
  }
  return model;
}

}  // namespace

entropy::GaussianModel predict_motion_prior(const FeatureTensor& ref_feat,
                                            int cell_size,
                                            entropy::Shape3 motion_shape,
                                            const entropy::LatentGrid* prev_motion,
                                            const PriorCoefficients& coeff) {
  if (motion_shape.channels != 2)
    throw std::invalid_argument("shape mismatch: motion latents must have 2 channels");
  std::vector<float> cells =
      cell_stddev(ref_feat, cell_size, motion_shape.height, motion_shape.width);
  std::vector<float> sbar(motion_shape.size());
  size_t plane = cells.size();
  std::copy(cells.begin(), cells.end(), sbar.begin());
  std::copy(cells.begin(), cells.end(), sbar.begin() + plane);
  return affine_prior(motion_shape, sbar, prev_motion, coeff,
                      coeff.motion_structure_gain);
}

entropy::GaussianModel predict_residual_prior(const FeatureTensor& pred_feat,
                                              float qstep,
                                              const entropy::LatentGrid* prev_residual,
                                              const PriorCoefficients& coeff) {
  // Structure statistic in the residual latents' own units: the block
  // std-dev is mean-free AC energy, and the transform is orthonormal, so
  // dividing by qstep re-expresses exactly that spread at the coded scale.
  // Raw feature amplitude would overstate the spread by the quantizer step
  // and price a near-perfect prediction's all-zero residual like fresh
  // texture.
  return affine_prior(tensor_shape(pred_feat), block_stddev(pred_feat),
                      prev_residual, coeff, 1.0f / qstep);
}

entropy::GaussianModel predict_ci_prior(const FeatureTensor& aligned_ref,
                                        float qstep,
                                        const PriorCoefficients& coeff) {
  entropy::GaussianModel model;
  model.shape = tensor_shape(aligned_ref);
  model.mu = analysis(aligned_ref, qstep).values;
  // The structure statistic lives in the same latent units as mu, so sigma
  // scales with the spread of the values it models rather than with raw
  // sample amplitude. A matching reference then prices the whole stream
  // near q_max, well below an intra-coded picture.
  FeatureTensor relatent(aligned_ref.channels, aligned_ref.height,
                         aligned_ref.width, aligned_ref.scale);
  relatent.data = model.mu;
  std::vector<float> sbar = block_stddev(relatent);
  model.sigma.resize(sbar.size());
  for (size_t i = 0; i < sbar.size(); ++i)
    model.sigma[i] = clamp_sigma(coeff.beta0 + coeff.beta1 * sbar[i], coeff);
  return model;
}

entropy::GaussianModel intra_prior(entropy::Shape3 shape,
                                   const PriorCoefficients& coeff) {
  if (shape.size() == 0) throw std::invalid_argument("shape mismatch: empty latents");
  entropy::GaussianModel model;
  model.shape = shape;
  model.mu.assign(shape.size(), 0.0f);
  model.sigma.resize(shape.size());
  const size_t plane_size = static_cast<size_t>(shape.height) * shape.width;
  std::vector<float> plane(plane_size);
  for_each_block(shape.height, shape.width, [&](int by, int bx, int bh, int bw) {
    for (int u = 0; u < bh; ++u) {
      for (int v = 0; v < bw; ++v) {
        float banded = std::ldexp(42.5f, -(u + v));
        banded = std::min(std::max(banded, 0.4f), 64.0f);
        plane[static_cast<size_t>(by + u) * shape.width + (bx + v)] =
            clamp_sigma(banded, coeff);
      }
    }
  });
  for (int c = 0; c < shape.channels; ++c)
    std::copy(plane.begin(), plane.end(), model.sigma.begin() + c * plane_size);
  return model;
}

}  // namespace civc::transforms
