// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "probefuse/probe_render.hpp"

namespace probefuse {

// All image metrics run on sRGB EV0 sphere renders clipped to [0,1],
// restricted to the sphere mask.

// Root mean squared error over masked pixels and channels.
double rmse(const Image3 &a, const Image3 &b, const Image1 &mask);

// Scale-invariant RMSE: the optimal scalar alpha = <pred,gt>/<pred,pred> is
// fit on the linear renders, then the aligned prediction is sRGB-encoded
// and compared. Zero predictions fall back to alpha = 0.
double si_rmse(const Image3 &pred_linear, const Image3 &gt_linear,
               const Image1 &mask);
double si_scale(const Image3 &pred_linear, const Image3 &gt_linear,
                const Image1 &mask);

// Standard SSIM: 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03, L=1,
// averaged over channels, masked mean. Throws InputError below 11x11.
double ssim(const Image3 &a, const Image3 &b, const Image1 &mask);

// Mean per-pixel angle between RGB vectors in degrees; pixels where either
// side is the zero vector are skipped. Throws InputError when every masked
// pixel is zero.
double angular_error_deg(const Image3 &a, const Image3 &b, const Image1 &mask);

// Radiance-weighted mean direction of an environment map (luminance times
// solid angle); a cheap probe for where the light mass sits.
Vec3 dominant_direction(const HdriMap &env);

struct MaterialMetrics {
    double rmse = 0;
    double si_rmse = 0;
    double ssim = 0;
    double angular_error_deg = 0;
};

struct MetricsReport {
    // per-frame rows in frame order, one entry per material
    std::vector<std::map<std::string, MaterialMetrics>> frames;
    std::map<std::string, MaterialMetrics> aggregate;  // mean over frames
};

// Renders the four test materials (mirror, diffuse, glossy, matte) under
// the predicted and ground-truth envs with a shared seed and geometry, then
// scores every metric per material per frame.
MetricsReport evaluate(const std::vector<HdriMap> &pred,
                       const std::vector<HdriMap> &gt,
                       const CameraModel &camera, const SphereSpec &sphere,
                       int samples, uint64_t seed);

std::string metrics_csv(const MetricsReport &report);
std::string metrics_json(const MetricsReport &report);

}  // namespace probefuse
