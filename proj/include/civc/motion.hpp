// Copyright (c) 2026 the civc authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "civc/core.hpp"

// Pixel-to-feature, global-to-local motion: exhaustive block matching in
// pixel space seeds a per-cell feature-space field, which a local integer
// search then refines against the target features. Alignment warps the
// reference features with one shared vector per cell.
//
// Displacement convention throughout: the sample at (x, y) in the current
// frame is predicted from (x - dx, y - dy) in the reference.

namespace civc::motion {

// Per 8x8-pixel-block exhaustive integer SAD search over displacements in
// [-search_radius, search_radius]^2, reference sampled with edge
// replication. Ties prefer the smallest |dx| + |dy|, then smallest dy, then
// smallest dx, so identical frames yield an exactly zero field. Returned
// field is in pixel units with cell_size = 8.
MotionField estimate_pixel_flow(const Frame& ref, const Frame& cur,
                                int search_radius);

// Average-pools the pixel field onto the feature cell grid (cells cover
// cell_size feature samples, i.e. cell_size * scale source pixels) and
// divides displacements by scale. Grid geometry mirrors extract_features'
// padding for a frame_height x frame_width frame.
MotionField init_feature_motion(const MotionField& pixel_flow,
                                int frame_height, int frame_width, int scale,
                                int cell_size);

// Bilinear per-cell warp: every sample of every channel in cell k is
// gathered from ref_feat at (x - dx_k, y - dy_k), with sampling clamped to
// the tensor edges.
FeatureTensor align(const FeatureTensor& ref_feat, const MotionField& mf);

// Per-cell integer-delta refinement: searches deltas in
// [-refine_radius, refine_radius]^2 feature units around init, minimizing
// the SAD between the realigned cell and cur_feat. Tie-break as in
// estimate_pixel_flow, so delta = 0 wins when nothing improves; the refined
// cost therefore never exceeds the initial cost.
MotionField refine_motion(const MotionField& init, const FeatureTensor& ref_feat,
                          const FeatureTensor& cur_feat, int refine_radius);

// 2 x rows x cols tensor view of a field (channel 0 = dx, channel 1 = dy)
// and its inverse. The motion stream is entropy-coded through the same
// analysis/skip path as residuals via this view.
FeatureTensor motion_to_tensor(const MotionField& mf);
MotionField tensor_to_motion(const FeatureTensor& tensor, int cell_size);

}  // namespace civc::motion
