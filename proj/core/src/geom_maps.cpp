// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#include "probefuse/geom_maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "probefuse/parallel.hpp"

namespace probefuse {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Ray-sphere intersection from the origin along unit direction v.
// Returns the nearest positive t, or a negative value on miss.
double intersect_sphere(const Vec3 &v, const SphereSpec &s) {
    const double b = dot(v, s.center);
    const double disc = b * b - (dot(s.center, s.center) - s.radius * s.radius);
    if (disc < 0) return -1.0;
    const double sq = std::sqrt(disc);
    const double t = b - sq;
    if (t > 0) return t;
    const double t2 = b + sq;  // camera inside the sphere
    return t2 > 0 ? t2 : -1.0;
}

}  // namespace

void validate(const CameraModel &cam) {
    if (cam.width < 1 || cam.height < 1)
        throw InputError("camera: non-positive image dimensions");
    if (!(cam.vertical_fov > 0.0) || !(cam.vertical_fov < kPi))
        throw InputError("camera: vertical_fov must be in (0, pi)");
}

Vec3 pixel_ray(const CameraModel &cam, double px, double py) {
    const double tan_half = std::tan(cam.vertical_fov * 0.5);
    const double half_h = cam.height * 0.5;
    const double x = (px - cam.width * 0.5) / half_h * tan_half;
    const double y = (half_h - py) / half_h * tan_half;
    return normalize(Vec3{x, y, -1.0});
}

Vec3 unproject(const CameraModel &cam, double px, double py, double depth) {
    if (!(depth > 0)) throw InputError("unproject: depth must be > 0");
    const double tan_half = std::tan(cam.vertical_fov * 0.5);
    const double half_h = cam.height * 0.5;
    const double x = (px - cam.width * 0.5) / half_h * tan_half;
    const double y = (half_h - py) / half_h * tan_half;
    return Vec3{x * depth, y * depth, -depth};
}

void project(const CameraModel &cam, const Vec3 &p, double &px, double &py) {
    if (!(p.z < 0)) throw InputError("project: point must be in front (z < 0)");
    const double tan_half = std::tan(cam.vertical_fov * 0.5);
    const double half_h = cam.height * 0.5;
    const double inv_z = 1.0 / (-p.z);
    px = cam.width * 0.5 + p.x * inv_z / tan_half * half_h;
    py = half_h - p.y * inv_z / tan_half * half_h;
}

SphereGeometry sphere_normals(const CameraModel &cam, const SphereSpec &sphere) {
    validate(cam);
    if (!(sphere.radius > 0)) throw InputError("sphere: radius must be > 0");
    SphereGeometry g;
    g.width = cam.width;
    g.height = cam.height;
    g.mask = Image1(cam.width, cam.height);
    g.normals = Image3(cam.width, cam.height);
    g.view_dirs = Image3(cam.width, cam.height);
    g.depth = Image1(cam.width, cam.height);
    parallel_for(0, cam.height, [&](int y) {
        for (int x = 0; x < cam.width; ++x) {
            const Vec3 v = pixel_ray(cam, x + 0.5, y + 0.5);
            g.view_dirs.set(x, y, v);
            const double t = intersect_sphere(v, sphere);
            if (t <= 0) continue;
            const Vec3 hit = v * t;
            g.mask.at(x, y) = 1.0;
            g.normals.set(x, y, normalize(hit - sphere.center));
            g.depth.at(x, y) = -hit.z;
        }
    });
    return g;
}

DirectionMap direction_map(const CameraModel &cam, const Image1 &depth_map,
                           const SphereSpec &sphere) {
    validate(cam);
    if (depth_map.width != cam.width || depth_map.height != cam.height)
        throw InputError("direction_map: depth map does not match camera size");
    const SphereGeometry g = sphere_normals(cam, sphere);
    DirectionMap out;
    out.dir = Image3(cam.width, cam.height);
    out.valid = Image1(cam.width, cam.height, 1.0);
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            const double scene_depth = depth_map.at(x, y);
            const bool on_sphere =
                g.mask.at(x, y) > 0 &&
                (scene_depth <= 0 || g.depth.at(x, y) <= scene_depth);
            if (on_sphere) {
                out.dir.set(x, y,
                            reflect(g.view_dirs.get(x, y), g.normals.get(x, y)));
                continue;
            }
            if (!(scene_depth > 0))
                throw InputError("direction_map: non-positive scene depth");
            const Vec3 p = unproject(cam, x + 0.5, y + 0.5, scene_depth);
            const Vec3 d = p - sphere.center;
            const double len = norm(d);
            if (len < 1e-12) {
                out.dir.set(x, y, Vec3{0, 0, 0});
                out.valid.at(x, y) = 0.0;
            } else {
                out.dir.set(x, y, d / len);
            }
        }
    }
    return out;
}

Image1 distance_map_raw(const CameraModel &cam, const Image1 &depth_map,
                        const SphereSpec &sphere) {
    validate(cam);
    if (depth_map.width != cam.width || depth_map.height != cam.height)
        throw InputError("distance_map: depth map does not match camera size");
    const SphereGeometry g = sphere_normals(cam, sphere);
    Image1 out(cam.width, cam.height);
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            const double scene_depth = depth_map.at(x, y);
            const bool on_sphere =
                g.mask.at(x, y) > 0 &&
                (scene_depth <= 0 || g.depth.at(x, y) <= scene_depth);
            Vec3 p;
            if (on_sphere) {
                p = g.view_dirs.get(x, y) * (g.depth.at(x, y) /
                                             -g.view_dirs.get(x, y).z);
            } else {
                if (!(scene_depth > 0))
                    throw InputError("distance_map: non-positive scene depth");
                p = unproject(cam, x + 0.5, y + 0.5, scene_depth);
            }
            out.at(x, y) = norm(p - sphere.center);
        }
    }
    return out;
}

Image1 log_normalize(const Image1 &img) {
    Image1 out(img.width, img.height);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < img.data.size(); ++i) {
        out.data[i] = std::log1p(img.data[i]);
        lo = std::min(lo, out.data[i]);
        hi = std::max(hi, out.data[i]);
    }
    const double range = hi - lo;
    if (!(range > 0)) {
        std::fill(out.data.begin(), out.data.end(), 0.0);
        return out;
    }
    for (double &v : out.data) v = (v - lo) / range;
    return out;
}

ConditionMaps condition_maps(const CameraModel &cam, const Image3 &rgb,
                             const Image1 &depth_map,
                             const SphereSpec &sphere) {
    validate(cam);
    if (depth_map.width != cam.width || depth_map.height != cam.height)
        throw InputError("condition_maps: depth map does not match camera size");
    const bool has_rgb = rgb.width > 0;
    if (has_rgb && (rgb.width != cam.width || rgb.height != cam.height))
        throw InputError("condition_maps: rgb does not match camera size");

    const SphereGeometry g = sphere_normals(cam, sphere);

    ConditionMaps maps;
    maps.sphere_mask = g.mask;
    maps.normals = g.normals;

    maps.rgb_masked = has_rgb ? rgb : Image3(cam.width, cam.height);
    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x)
            if (g.mask.at(x, y) > 0) maps.rgb_masked.set(x, y, {0, 0, 0});

    // Composite the sphere's own z-depth into the scene depth before
    // normalizing.
    Image1 composite = depth_map;
    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x)
            if (g.mask.at(x, y) > 0) composite.at(x, y) = g.depth.at(x, y);
    maps.depth = log_normalize(composite);

    DirectionMap dm = direction_map(cam, depth_map, sphere);
    maps.dir = std::move(dm.dir);
    maps.dir_valid = std::move(dm.valid);
    maps.dist = log_normalize(distance_map_raw(cam, depth_map, sphere));
    return maps;
}

double sample_depth_factor(double u) {
    u = std::clamp(u, 0.0, 1.0);
    constexpr double d_min = 0.25, d_max = 0.98, alpha = 0.4;
    return d_min + (d_max - d_min) * std::pow(u, alpha);
}

double sphere_scene_depth(double delta, const Image1 &depth_map,
                          const Image1 &footprint_mask) {
    if (!depth_map.same_size(footprint_mask))
        throw InputError("sphere_scene_depth: mask does not match depth map");
    double min_depth = std::numeric_limits<double>::infinity();
    bool any = false;
    for (size_t i = 0; i < depth_map.data.size(); ++i) {
        if (footprint_mask.data[i] <= 0) continue;
        any = true;
        if (!(depth_map.data[i] > 0))
            throw InputError("sphere_scene_depth: non-positive footprint depth");
        min_depth = std::min(min_depth, depth_map.data[i]);
    }
    if (!any) throw InputError("sphere_scene_depth: empty footprint mask");
    return delta * min_depth;
}

double world_radius(double sphere_depth, const CameraModel &cam,
                    double image_radius_fraction) {
    validate(cam);
    const double angular = image_radius_fraction * cam.vertical_fov * 0.5;
    if (!(angular > 0) || !(angular < kPi / 2))
        throw InputError("world_radius: angular radius out of range");
    return sphere_depth * std::sin(angular);
}

std::vector<SphereSpec> animate(const SphereSpec &first, const SphereSpec &last,
                                int frames) {
    if (frames < 2) throw InputError("animate: frames must be >= 2");
    std::vector<SphereSpec> out(frames);
    for (int t = 0; t < frames; ++t) {
        const double a = static_cast<double>(t) / (frames - 1);
        out[t].center = first.center * (1.0 - a) + last.center * a;
        out[t].radius = first.radius * (1.0 - a) + last.radius * a;
    }
    return out;
}

}  // namespace probefuse
