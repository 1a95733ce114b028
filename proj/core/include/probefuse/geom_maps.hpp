// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "probefuse/image.hpp"

namespace probefuse {

// Pinhole camera. Same frame as the environment map: y up, x right,
// forward -z, right handed. Depth maps use the z-depth convention
// (depth = -p.z, not ray length). Continuous pixel coordinates put the
// center of texel (i, j) at (i + 0.5, j + 0.5); pixels are square and the
// vertical field of view spans the image height.
struct CameraModel {
    int width = 0, height = 0;
    double vertical_fov = 0;  // radians, in (0, pi)
};

void validate(const CameraModel &cam);

// Unit view ray through a pixel.
Vec3 pixel_ray(const CameraModel &cam, double px, double py);

// 3D point at z-depth `depth` along the pixel's ray. Throws InputError on
// depth <= 0.
Vec3 unproject(const CameraModel &cam, double px, double py, double depth);

// Inverse of unproject up to depth. Requires p.z < 0.
void project(const CameraModel &cam, const Vec3 &p, double &px, double &py);

struct SphereSpec {
    Vec3 center;     // camera-frame, z < 0 when in front of the camera
    double radius = 0;  // scene units, > 0
};

// Analytic ray-sphere intersection for every pixel.
struct SphereGeometry {
    int width = 0, height = 0;
    Image1 mask;       // 1 where the sphere is visible
    Image3 normals;    // unit surface normal, zero off mask
    Image3 view_dirs;  // unit view ray (points away from the camera)
    Image1 depth;      // z-depth of the hit point, zero off mask
};

SphereGeometry sphere_normals(const CameraModel &cam, const SphereSpec &sphere);

// Per-pixel direction-to-sphere conditioning map: off-sphere pixels carry
// the unit vector from the sphere center to the scene point, on-sphere
// pixels the mirror-reflected view direction. `valid` is 0 where the scene
// point coincides with the sphere center (direction undefined).
struct DirectionMap {
    Image3 dir;
    Image1 valid;
};

DirectionMap direction_map(const CameraModel &cam, const Image1 &depth_map,
                           const SphereSpec &sphere);

// Raw euclidean distance from each pixel's 3D point to the sphere center
// (on-sphere pixels use the sphere hit point, so they sit at ~radius).
Image1 distance_map_raw(const CameraModel &cam, const Image1 &depth_map,
                        const SphereSpec &sphere);

// log(1+x) followed by min-max normalization to [0,1]. Constant maps
// normalize to zero.
Image1 log_normalize(const Image1 &img);

// The five-map conditioning bundle. rgb may be an empty image when no
// background frame is available; rgb_masked is zero there.
struct ConditionMaps {
    Image3 rgb_masked;   // sRGB background with the sphere region zeroed
    Image1 depth;        // log-normalized composite (sphere depth inpainted)
    Image3 normals;      // sphere normal map, zero off sphere
    Image3 dir;          // direction map (see above)
    Image1 dir_valid;
    Image1 dist;         // log-normalized distance map
    Image1 sphere_mask;
};

ConditionMaps condition_maps(const CameraModel &cam, const Image3 &rgb,
                             const Image1 &depth_map, const SphereSpec &sphere);

// Probe placement sampling. The depth factor warps a uniform u through
// delta = 0.25 + (0.98 - 0.25) * u^0.4.
double sample_depth_factor(double u);

// delta times the minimum scene depth over the sphere footprint.
double sphere_scene_depth(double delta, const Image1 &depth_map,
                          const Image1 &footprint_mask);

// World-space radius that keeps a fixed image-space radius: the sphere
// subtends angular radius rho * vfov/2, so r = d * sin(rho * vfov/2).
double world_radius(double sphere_depth, const CameraModel &cam,
                    double image_radius_fraction);

// Linear interpolation of center and radius across a sequence.
std::vector<SphereSpec> animate(const SphereSpec &first, const SphereSpec &last,
                                int frames);

}  // namespace probefuse
