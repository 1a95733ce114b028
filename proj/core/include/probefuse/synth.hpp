// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "probefuse/fusion.hpp"

namespace probefuse {

// Analytic ground-truth environment: constant ambient, optional vertical
// gradient, and a set of disk lights (direction, angular radius, radiance).
struct DiskLight {
    Vec3 direction;          // unit
    double angular_radius = 0;  // radians
    Vec3 radiance;
};

struct AnalyticEnv {
    Vec3 ambient;
    std::vector<DiskLight> lights;
    // vertical sky gradient added on top of ambient; zero disables it
    Vec3 gradient_top, gradient_bottom;
};

// Rasterizes the analytic env into an equirectangular map. Disk edges are
// supersampled so the baked flux matches the analytic total closely.
HdriMap bake(const AnalyticEnv &env, int width, int height);

// Exact flux (radiance-weighted solid angle integral) of the analytic env,
// the oracle for bake().
Vec3 analytic_flux(const AnalyticEnv &env);

// Circular column shift by `angle` radians with fractional bilinear wrap.
// Positive angles move content toward increasing azimuth. Row sums are
// preserved exactly, integer-texel shifts are exact rolls.
HdriMap rotate_azimuth(const HdriMap &map, double angle);

enum class Scenario {
    dynamic_sphere,
    dynamic_camera,
    dynamic_lighting,
    combination,
};

Scenario scenario_from_string(const std::string &name);
std::string to_string(Scenario s);

// Desk-scale stand-in for the dataset generator: what changes per frame.
// dynamic_lighting rotates the env azimuth and scales light intensity,
// dynamic_camera yaws the camera (seen as an opposite env rotation),
// dynamic_sphere interpolates the sphere, combination does all of it.
struct SequenceScript {
    int frames = 1;
    Scenario scenario = Scenario::dynamic_lighting;
    double azimuth_rate = 0;  // radians per frame
    double intensity_start = 1.0, intensity_end = 1.0;  // light scale keyframes
    SphereSpec sphere_start, sphere_end;
};

struct SynthResult {
    std::vector<ProbeObservation> observations;
    std::vector<HdriMap> gt_envs;  // one per frame
};

// Renders ground-truth spheres under the scripted env with probe_render,
// exposes each bracket, optionally adds Gaussian noise in sRGB space, then
// encodes and clips to [0,1] (the LDR observation model). Returns the
// observations together with the per-frame ground-truth maps.
SynthResult gen_observations(const AnalyticEnv &env,
                             const SequenceScript &script,
                             const CameraModel &camera,
                             const std::vector<int> &ev_set,
                             const std::vector<MaterialKind> &materials,
                             double noise_sigma, uint64_t seed,
                             int env_width, int env_height, int samples);

}  // namespace probefuse
