// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "probefuse/fusion.hpp"

namespace probefuse {

// JSON probe-set manifest tying a sequence of observations to their sphere
// geometry and camera. Schema (version 1):
//
// {
//   "version": 1,
//   "camera": {"width": W, "height": H, "vertical_fov_deg": F},
//   "frames": [
//     {"index": 0, "observations": [
//        {"image_path": "f0_mirror_ev0.exr", "material": "mirror",
//         "ev": 0, "sphere_center": [x, y, z], "sphere_radius": r} ]}
//   ]
// }
//
// Paths are resolved relative to the manifest's directory. Violations are
// rejected with the offending field named, before any computation starts.

struct ManifestObservation {
    std::string image_path;
    MaterialKind material = MaterialKind::mirror;
    int ev = 0;
    Vec3 sphere_center;
    double sphere_radius = 0;
};

struct ManifestFrame {
    int index = 0;
    std::vector<ManifestObservation> observations;
};

struct ProbeManifest {
    int version = 1;
    CameraModel camera;
    std::vector<ManifestFrame> frames;
};

ProbeManifest read_manifest(const std::string &path);
void write_manifest(const ProbeManifest &manifest, const std::string &path);

// Reads every referenced image and derives the per-observation geometry.
std::vector<ProbeObservation> load_observations(const ProbeManifest &manifest,
                                                const std::string &base_dir);

// Fusion settings + output directory, serialized as JSON; absent fields keep
// their defaults.
struct RunConfig {
    FusionConfig fusion;
    std::string output_dir = ".";
};

RunConfig read_run_config(const std::string &path);

}  // namespace probefuse
