// Copyright (c) 2026 the civc authors
// SPDX-License-Identifier: Apache-2.0

#include "civc/core.hpp"

namespace civc {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& detail) {
  throw ConfigError(field + ": " + detail);
}

}  // namespace

CodecConfig validate_config(const CodecConfig& cfg) {
  // Upper bound comes from the container header's one-byte gop field.
  if (cfg.gop_size < 1 || cfg.gop_size > 255) fail("gop_size", "must be in [1, 255]");
  if (cfg.quality_index < 0 ||
      cfg.quality_index >= static_cast<int>(cfg.quant.steps.size()))
    fail("quality_index", "must be in [0, " +
                              std::to_string(cfg.quant.steps.size() - 1) + "]");
  // tau_sigma = 0 is the documented skip-disable value.
  if (!(cfg.tau_sigma >= 0.0f) || cfg.tau_sigma >= cfg.prior.sigma_max)
    fail("tau_sigma", "must be in [0, sigma_max)");
  if (cfg.search_radius < 0) fail("search_radius", "must be >= 0");
  if (cfg.refine_radius < 0) fail("refine_radius", "must be >= 0");
  if (cfg.feature_scale < 1) fail("feature_scale", "must be >= 1");
  if (cfg.cell_size < 1) fail("cell_size", "must be >= 1");
  if (!(cfg.motion_qstep > 0.0f) || !std::isfinite(cfg.motion_qstep))
    fail("motion_qstep", "must be positive and finite");
  // The largest motion coefficient is the DC of a block at the search bound;
  // it must land inside the entropy coder's fixed +/-255 window.
  float max_motion = 8.0f * (static_cast<float>(cfg.search_radius) / cfg.feature_scale +
                             static_cast<float>(cfg.refine_radius));
  if (max_motion / cfg.motion_qstep > 255.0f)
    fail("motion_qstep", "motion latents must fit the coding window");
  float prev = 0.0f;
  for (size_t i = 0; i < cfg.quant.steps.size(); ++i) {
    float s = cfg.quant.steps[i];
    if (!(s > 0.0f) || !std::isfinite(s))
      fail("quant.steps", "entries must be positive and finite");
    if (i > 0 && !(s > prev))
      fail("quant.steps", "entries must be strictly increasing");
    prev = s;
  }
  if (!(cfg.prior.sigma_min > 0.0f)) fail("sigma_min", "must be > 0");
  if (!(cfg.prior.sigma_max > cfg.prior.sigma_min))
    fail("sigma_max", "must be > sigma_min");
  if (!std::isfinite(cfg.prior.alpha)) fail("alpha", "must be finite");
  if (!(cfg.prior.beta0 >= 0.0f) || !(cfg.prior.beta1 >= 0.0f) ||
      !(cfg.prior.beta2 >= 0.0f))
    fail("beta", "sigma weights must be >= 0");
  if (!(cfg.prior.motion_structure_gain >= 0.0f))
    fail("motion_structure_gain", "must be >= 0");
  return cfg;
}

}  // namespace civc
