// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#include "probefuse/synth.hpp"

#include <algorithm>
#include <cmath>

#include "probefuse/color.hpp"
#include "probefuse/rng.hpp"

namespace probefuse {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec3 rotate_y(const Vec3 &v, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    // consistent with the equirect convention: positive angle increases the
    // azimuth phi measured from -z toward +x
    return {c * v.x - s * v.z, v.y, s * v.x + c * v.z};
}

}  // namespace

HdriMap bake(const AnalyticEnv &env, int width, int height) {
    if (width != 2 * height || height < 1)
        throw InputError("bake: width must equal 2*height");
    const bool has_gradient =
        norm(env.gradient_top) > 0 || norm(env.gradient_bottom) > 0;
    HdriMap out(width, height);
    const double texel_angle = kPi / height;  // row height in radians

    for (int y = 0; y < height; ++y) {
        const double v = (y + 0.5) / height;
        for (int x = 0; x < width; ++x) {
            const double u = (x + 0.5) / width;
            const Vec3 dir = pixel_to_dir(u, v);
            Vec3 c = env.ambient;
            if (has_gradient)
                c += env.gradient_top * (1.0 - v) + env.gradient_bottom * v;
            for (const DiskLight &light : env.lights) {
                const double angle = std::acos(
                    std::clamp(dot(dir, light.direction), -1.0, 1.0));
                const double margin = 1.5 * texel_angle;
                if (angle <= light.angular_radius - margin) {
                    c += light.radiance;
                } else if (angle < light.angular_radius + margin) {
                    // edge texel: supersample the coverage fraction
                    const double cos_rho = std::cos(light.angular_radius);
                    int inside = 0;
                    constexpr int grid = 16;
                    for (int sy = 0; sy < grid; ++sy)
                        for (int sx = 0; sx < grid; ++sx) {
                            const double su = (x + (sx + 0.5) / grid) / width;
                            const double sv = (y + (sy + 0.5) / grid) / height;
                            if (dot(pixel_to_dir(su, sv), light.direction) >=
                                cos_rho)
                                ++inside;
                        }
                    c += light.radiance *
                         (static_cast<double>(inside) / (grid * grid));
                }
            }
            out.set(x, y, c);
        }
    }
    return out;
}

Vec3 analytic_flux(const AnalyticEnv &env) {
    Vec3 flux = env.ambient * (4.0 * kPi);
    flux += (env.gradient_top + env.gradient_bottom) * (2.0 * kPi);
    for (const DiskLight &light : env.lights)
        flux += light.radiance *
                (2.0 * kPi * (1.0 - std::cos(light.angular_radius)));
    return flux;
}

HdriMap rotate_azimuth(const HdriMap &map, double angle) {
    const int w = map.width, h = map.height;
    const double shift = angle / (2.0 * kPi) * w;
    HdriMap out(w, h);
    for (int x = 0; x < w; ++x) {
        double src = x - shift;
        src -= std::floor(src / w) * w;  // into [0, w)
        const int x0 = static_cast<int>(std::floor(src)) % w;
        const int x1 = (x0 + 1) % w;
        const double frac = src - std::floor(src);
        for (int y = 0; y < h; ++y)
            out.set(x, y,
                    map.get(x0, y) * (1.0 - frac) + map.get(x1, y) * frac);
    }
    return out;
}

Scenario scenario_from_string(const std::string &name) {
    if (name == "dynamic_sphere") return Scenario::dynamic_sphere;
    if (name == "dynamic_camera") return Scenario::dynamic_camera;
    if (name == "dynamic_lighting") return Scenario::dynamic_lighting;
    if (name == "combination") return Scenario::combination;
    throw InputError("unknown scenario '" + name + "'");
}

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::dynamic_sphere: return "dynamic_sphere";
        case Scenario::dynamic_camera: return "dynamic_camera";
        case Scenario::dynamic_lighting: return "dynamic_lighting";
        case Scenario::combination: return "combination";
    }
    return "unknown";
}

SynthResult gen_observations(const AnalyticEnv &env,
                             const SequenceScript &script,
                             const CameraModel &camera,
                             const std::vector<int> &ev_set,
                             const std::vector<MaterialKind> &materials,
                             double noise_sigma, uint64_t seed,
                             int env_width, int env_height, int samples) {
    validate(camera);
    if (script.frames < 1) throw InputError("gen_observations: frames < 1");
    if (ev_set.empty()) throw InputError("gen_observations: empty EV set");
    if (materials.empty())
        throw InputError("gen_observations: empty material set");

    const bool lighting_moves = script.scenario == Scenario::dynamic_lighting ||
                                script.scenario == Scenario::combination;
    const bool camera_moves = script.scenario == Scenario::dynamic_camera;
    const bool sphere_moves = script.scenario == Scenario::dynamic_sphere ||
                              script.scenario == Scenario::combination;

    std::vector<SphereSpec> spheres;
    if (sphere_moves && script.frames >= 2)
        spheres = animate(script.sphere_start, script.sphere_end, script.frames);
    else
        spheres.assign(script.frames, script.sphere_start);

    SynthResult result;
    result.gt_envs.reserve(script.frames);

    for (int t = 0; t < script.frames; ++t) {
        const double blend =
            script.frames > 1 ? static_cast<double>(t) / (script.frames - 1)
                              : 0.0;
        // frame env: analytic lights rotated/scaled, then baked
        AnalyticEnv frame_env = env;
        double rotation = 0;
        if (lighting_moves) rotation = script.azimuth_rate * t;
        if (camera_moves) rotation = -script.azimuth_rate * t;  // camera yaw
        const double intensity =
            script.intensity_start +
            (script.intensity_end - script.intensity_start) * blend;
        for (DiskLight &light : frame_env.lights) {
            light.direction = rotate_y(light.direction, rotation);
            if (lighting_moves) light.radiance = light.radiance * intensity;
        }
        HdriMap gt = bake(frame_env, env_width, env_height);

        SphereSpec sphere = spheres[t];
        if (camera_moves) sphere.center = rotate_y(sphere.center, rotation);
        const SphereGeometry geom = sphere_normals(camera, sphere);

        for (size_t mi = 0; mi < materials.size(); ++mi) {
            const MaterialKind kind = materials[mi];
            Material mat{kind, 0};
            const SphereImage sphere_render = render_material(
                gt, geom, mat, samples,
                mix_seed(seed, static_cast<uint64_t>(t) * 131 + mi));

            for (int ev : ev_set) {
                Image3 img(camera.width, camera.height);
                Rng noise(mix_seed(seed, (static_cast<uint64_t>(t) * 131 + mi) *
                                             977 +
                                         static_cast<uint64_t>(ev + 64)));
                for (int y = 0; y < camera.height; ++y)
                    for (int x = 0; x < camera.width; ++x) {
                        if (geom.mask.at(x, y) <= 0) continue;
                        for (int c = 0; c < 3; ++c) {
                            double s = srgb_encode_unclipped(
                                ev_scale(ev) *
                                sphere_render.pixels.at(x, y, c));
                            if (noise_sigma > 0)
                                s += noise_sigma * noise.next_gaussian();
                            img.at(x, y, c) = std::clamp(s, 0.0, 1.0);
                        }
                    }
                ProbeObservation obs;
                obs.image = std::move(img);
                obs.material = kind;
                obs.ev = ev;
                obs.frame = t;
                obs.sphere = sphere;
                obs.camera = camera;
                obs.geometry = geom;
                result.observations.push_back(std::move(obs));
            }
        }
        result.gt_envs.push_back(std::move(gt));
    }
    return result;
}

}  // namespace probefuse
