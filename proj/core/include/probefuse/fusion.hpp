// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "probefuse/probe_render.hpp"

namespace probefuse {

// One LDR sphere prediction: an sRGB crop plus everything needed to re-render
// it from a candidate environment. (frame, material, ev) triples are unique
// within an input set.
struct ProbeObservation {
    Image3 image;  // sRGB in [0,1]
    MaterialKind material = MaterialKind::mirror;
    int ev = 0;
    int frame = 0;
    SphereSpec sphere;
    CameraModel camera;
    SphereGeometry geometry;  // derived from camera + sphere
    std::string image_path;   // provenance, may be empty
};

struct FusionConfig {
    int iterations_per_frame = 1000;
    double learning_rate = 5e-3;
    double lambda = 0.1;  // temporal l1 weight
    double tau = 0.98;    // saturation threshold, sRGB units
    int levels = 8;
    int env_width = 512, env_height = 256;
    int diffuse_samples = 64;
    uint64_t seed = 0;
    bool saturation_mask_enabled = true;
};

struct FusionResult {
    std::vector<HdriMap> envs;       // one per frame, strictly positive
    std::vector<double> loss_trace;  // per optimizer iteration
    FusionConfig config;
};

// Per-pixel-per-channel mask: 0 only where prediction and observation both
// exceed tau, 1 otherwise. Keeps clipped highlights from dragging the
// recovered intensity down.
Image3 saturation_mask(const Image3 &pred, const Image3 &obs, double tau);

// One evaluation of the fusion objective for a single observation:
//   l = mean over mask of [ (y_hat - y)^2
//       + lambda/2 (|y_hat - y_hat_prev| + |y_hat - y_hat_next|) ]
// with neighbor terms dropped at sequence boundaries. Gradients flow into
// the pyramids of frames t-1, t, t+1.
struct LossStep {
    double loss = 0;
    double data_term = 0;
    double temporal_term = 0;
    std::vector<std::pair<int, LaplacianPyramid>> grads;  // frame -> gradient
};

// Builds the render taps internally (diffuse sample set drawn from
// taps_seed) and evaluates. Throws NumericalError on a non-finite forward
// pass.
LossStep loss_step(const std::vector<LaplacianPyramid> &pyramids,
                   const ProbeObservation &obs, const FusionConfig &config,
                   uint64_t taps_seed);

// Same evaluation against caller-provided taps. The taps freeze the Monte
// Carlo sample set and importance distribution, making this the function
// the analytic gradient actually differentiates; finite-difference checks
// must go through here.
LossStep loss_step_with_taps(const std::vector<LaplacianPyramid> &pyramids,
                             const ProbeObservation &obs,
                             const FusionConfig &config,
                             const RenderTaps &taps_t,
                             const RenderTaps *taps_prev,
                             const RenderTaps *taps_next);

// Recovers one environment per frame by Adam over log2 Laplacian-pyramid
// coefficients, starting from constant gray 0.5. Each iteration samples one
// observation uniformly and runs iterations_per_frame * frame_count steps
// in total. Deterministic given config.seed.
FusionResult fuse(const std::vector<ProbeObservation> &observations,
                  const FusionConfig &config);

}  // namespace probefuse
