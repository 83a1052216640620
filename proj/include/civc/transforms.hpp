// Copyright (c) 2026 the civc authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "civc/core.hpp"
#include "civc/entropy.hpp"

// Deterministic analysis/synthesis transforms and the Gaussian prior
// predictors that condition each latent stream on decoder-available data.
//
// Feature space is the source sample range (0..255): space-to-depth keeps
// the values, so quantization steps, sigma coefficients, and the coder
// window all live in one consistent unit.
//
// All model arithmetic that must match between encoder and decoder runs in
// single precision with a fixed evaluation order; block transforms
// accumulate in double and are compiled without FMA contraction.

namespace civc::transforms {

// Space-to-depth by `scale` on the luma plane, edge-replicated and padded to
// a multiple of 2*scale first. Channel c = dy*scale + dx holds the samples
// at offset (dy, dx) inside each scale x scale cell. Exactly invertible on
// the unpadded region by synthesize_frame.
FeatureTensor extract_features(const Frame& frame, int scale);

// Depth-to-space inverse of extract_features: crop to width x height, clamp
// to the 8-bit sample range, round half away from zero. Throws
// std::invalid_argument when the tensor does not match the geometry.
Frame synthesize_frame(const FeatureTensor& feat, int width, int height);

// Per-channel blocked orthonormal DCT-II with coefficients divided by qstep.
// Blocks are 8x8 with smaller edge blocks (size = remaining extent, >= 1),
// so output shape == input shape. Linear and, up to float storage of the
// result, exactly invertible by synthesis.
entropy::LatentGrid analysis(const FeatureTensor& feat, float qstep);

// Multiply by qstep, apply the inverse blocked DCT. Accepts real-valued
// latents (skipped entries carry non-integer mu values).
FeatureTensor synthesis(const entropy::LatentGrid& latents, float qstep);

// Population standard deviation of src over the DCT block containing each
// element, replicated across that block. The "structure" statistic the
// sigma model consumes; same element order as analysis output.
std::vector<float> block_stddev(const FeatureTensor& src);

// rows x cols map of local feature spread: population std over each
// cell_size x cell_size cell footprint, across all channels (edge cells
// shrink with the tensor). Structure statistic for motion latents.
std::vector<float> cell_stddev(const FeatureTensor& feat, int cell_size,
                               int rows, int cols);

// Prior for motion latents (shape must be 2 x rows x cols). Temporal term
// from the previous frame's decoded motion latents (nullptr when absent);
// structure term from the reference features, down-weighted by
// motion_structure_gain. Uses only decoder-available data.
entropy::GaussianModel predict_motion_prior(const FeatureTensor& ref_feat,
                                            int cell_size,
                                            entropy::Shape3 motion_shape,
                                            const entropy::LatentGrid* prev_motion,
                                            const PriorCoefficients& coeff);

// Prior for residual latents: same affine model with the motion-compensated
// prediction as the structure source and the previous frame's decoded
// residual latents as the temporal source. The structure statistic is the
// prediction's block std-dev divided by the stream's qstep -- the block AC
// spread re-expressed in the coded latents' units -- so a trustworthy
// prediction prices its residual near q_max instead of at texture cost.
entropy::GaussianModel predict_residual_prior(const FeatureTensor& pred_feat,
                                              float qstep,
                                              const entropy::LatentGrid* prev_residual,
                                              const PriorCoefficients& coeff);

// Prior for cI image latents: mu is the aligned reference re-expressed in
// latent space (the reference conditions the rate only); sigma is the
// structure term alone, with the block std-dev taken over those same
// latent-domain values so it shares mu's units.
entropy::GaussianModel predict_ci_prior(const FeatureTensor& aligned_ref,
                                        float qstep,
                                        const PriorCoefficients& coeff);

// Prior for I-frame latents, computable with no reference at all: mu = 0
// and a frequency-banded sigma, sigma(u, v) = clamp(42.5 * 2^-(u+v), 0.4,
// 64) for in-block frequency (u, v), then clamped to [sigma_min, sigma_max].
// The DC band covers the full latent range at the finest quantizer; the 0.4
// floor keeps every band codeable at the default skip threshold.
entropy::GaussianModel intra_prior(entropy::Shape3 shape,
                                   const PriorCoefficients& coeff);

}  // namespace civc::transforms
