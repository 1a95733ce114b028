// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#include "probefuse/probe_render.hpp"

#include <algorithm>
#include <cmath>

#include "probefuse/color.hpp"
#include "probefuse/parallel.hpp"
#include "probefuse/rng.hpp"

namespace probefuse {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLn2 = 0.6931471805599453;

struct TapAccumulator {
    std::vector<int64_t> counts;  // taps per pixel, turned into offsets
    std::vector<std::vector<uint32_t>> texels;
    std::vector<std::vector<double>> weights;

    explicit TapAccumulator(size_t pixels)
        : counts(pixels, 0), texels(pixels), weights(pixels) {}
};

RenderTaps pack_taps(int env_w, int env_h, int img_w, int img_h,
                     TapAccumulator &&acc) {
    RenderTaps taps;
    taps.env_width = env_w;
    taps.env_height = env_h;
    taps.image_width = img_w;
    taps.image_height = img_h;
    const size_t pixels = acc.texels.size();
    taps.offsets.resize(pixels + 1, 0);
    int64_t total = 0;
    for (size_t i = 0; i < pixels; ++i) {
        taps.offsets[i] = total;
        total += static_cast<int64_t>(acc.texels[i].size());
    }
    taps.offsets[pixels] = total;
    taps.texels.resize(total);
    taps.weights.resize(total);
    for (size_t i = 0; i < pixels; ++i) {
        std::copy(acc.texels[i].begin(), acc.texels[i].end(),
                  taps.texels.begin() + taps.offsets[i]);
        std::copy(acc.weights[i].begin(), acc.weights[i].end(),
                  taps.weights.begin() + taps.offsets[i]);
    }
    return taps;
}

void push_bilinear(std::vector<uint32_t> &texels, std::vector<double> &weights,
                   int env_w, int env_h, double u_px, double v_px,
                   double scale) {
    const BilinearTaps b = bilinear_taps(env_w, env_h, u_px, v_px);
    for (int k = 0; k < 4; ++k) {
        if (b.weight[k] == 0.0) continue;
        texels.push_back(static_cast<uint32_t>(b.texel[k]));
        weights.push_back(scale * b.weight[k]);
    }
}

// tangent/bitangent around a unit axis (Duff et al. branchless ONB)
void make_basis(const Vec3 &n, Vec3 &t, Vec3 &b) {
    const double sign = std::copysign(1.0, n.z);
    const double a = -1.0 / (sign + n.z);
    const double c = n.x * n.y * a;
    t = Vec3{1.0 + sign * n.x * n.x * a, sign * c, -sign * n.x};
    b = Vec3{c, sign + n.y * n.y * a, -n.y};
}

}  // namespace

std::string to_string(MaterialKind kind) {
    switch (kind) {
        case MaterialKind::mirror: return "mirror";
        case MaterialKind::diffuse: return "diffuse";
        case MaterialKind::glossy: return "glossy";
        case MaterialKind::matte: return "matte";
    }
    return "unknown";
}

MaterialKind material_from_string(const std::string &name) {
    if (name == "mirror") return MaterialKind::mirror;
    if (name == "diffuse") return MaterialKind::diffuse;
    if (name == "glossy") return MaterialKind::glossy;
    if (name == "matte") return MaterialKind::matte;
    throw InputError("unknown material '" + name + "'");
}

SamplingTable build_sampling_table(const HdriMap &env, const Vec3 &normal) {
    if (env.width != 2 * env.height)
        throw InputError("build_sampling_table: invalid env dimensions");
    const Image1 domega = solid_angle_map(env.width, env.height);
    const size_t n = env.pixel_count();
    SamplingTable table;
    table.width = env.width;
    table.height = env.height;
    table.weights.resize(n);
    table.pdf.resize(n);
    table.cdf.resize(n);

    double total = 0;
    for (int y = 0; y < env.height; ++y) {
        const double v = (y + 0.5) / env.height;
        for (int x = 0; x < env.width; ++x) {
            const double u = (x + 0.5) / env.width;
            const Vec3 r = pixel_to_dir(u, v);
            const double c = std::max(0.0, dot(normal, r));
            const size_t i = static_cast<size_t>(y) * env.width + x;
            table.weights[i] = c * luminance(env.get(x, y)) * domega.data[i];
            total += table.weights[i];
        }
    }
    if (!(total > 0)) {
        // visible hemisphere carries no radiance: cosine-only fallback
        total = 0;
        for (int y = 0; y < env.height; ++y) {
            const double v = (y + 0.5) / env.height;
            for (int x = 0; x < env.width; ++x) {
                const double u = (x + 0.5) / env.width;
                const Vec3 r = pixel_to_dir(u, v);
                const double c = std::max(0.0, dot(normal, r));
                const size_t i = static_cast<size_t>(y) * env.width + x;
                table.weights[i] = c * domega.data[i];
                total += table.weights[i];
            }
        }
    }
    double acc = 0;
    for (size_t i = 0; i < n; ++i) {
        table.weights[i] /= total;
        table.pdf[i] = table.weights[i] / domega.data[i];
        acc += table.weights[i];
        table.cdf[i] = std::min(acc, 1.0);
    }
    table.cdf[n - 1] = 1.0;
    return table;
}

LuminanceTable build_luminance_table(const HdriMap &env) {
    if (env.width != 2 * env.height)
        throw InputError("build_luminance_table: invalid env dimensions");
    // Coarsen to a 64-wide grid when the env divides evenly; the pdf stays
    // exact because cells are sampled uniformly in solid angle.
    int f = 1;
    if (env.width > 64 && env.width % 64 == 0) f = env.width / 64;
    LuminanceTable t;
    t.factor = f;
    t.width = env.width / f;
    t.height = env.height / f;
    const size_t n = static_cast<size_t>(t.width) * t.height;
    t.lum_area.assign(n, 0.0);
    t.dirs.resize(n);
    t.domega.resize(n);
    t.cos_top.resize(t.height);
    t.cos_bot.resize(t.height);

    const Image1 fine_domega = solid_angle_map(env.width, env.height);
    for (int y = 0; y < env.height; ++y)
        for (int x = 0; x < env.width; ++x) {
            const size_t cell =
                static_cast<size_t>(y / f) * t.width + (x / f);
            t.lum_area[cell] += luminance(env.get(x, y)) *
                                fine_domega.data[static_cast<size_t>(y) *
                                                 env.width + x];
        }
    for (int cy = 0; cy < t.height; ++cy) {
        t.cos_top[cy] = std::cos(kPi * cy / t.height);
        t.cos_bot[cy] = std::cos(kPi * (cy + 1) / t.height);
        const double cell_domega =
            (2.0 * kPi / t.width) * (t.cos_top[cy] - t.cos_bot[cy]);
        for (int cx = 0; cx < t.width; ++cx) {
            const size_t cell = static_cast<size_t>(cy) * t.width + cx;
            t.domega[cell] = cell_domega;
            t.dirs[cell] =
                pixel_to_dir((cx + 0.5) / t.width, (cy + 0.5) / t.height);
        }
    }
    return t;
}

Image3 RenderTaps::apply(const Image3 &env) const {
    Image3 out(image_width, image_height);
    parallel_for(0, image_height, [&](int y) {
        for (int x = 0; x < image_width; ++x) {
            const size_t px = static_cast<size_t>(y) * image_width + x;
            Vec3 acc{0, 0, 0};
            for (int64_t k = offsets[px]; k < offsets[px + 1]; ++k) {
                const size_t i = static_cast<size_t>(texels[k]) * 3;
                acc += Vec3{env.data[i], env.data[i + 1], env.data[i + 2]} *
                       weights[k];
            }
            out.set(x, y, acc);
        }
    });
    return out;
}

Image3 RenderTaps::apply_transpose(const Image3 &adjoint) const {
    Image3 out(env_width, env_height);
    // serial scatter: deterministic accumulation order
    const size_t pixels = static_cast<size_t>(image_width) * image_height;
    for (size_t px = 0; px < pixels; ++px) {
        const size_t a = px * 3;
        const double g0 = adjoint.data[a], g1 = adjoint.data[a + 1],
                     g2 = adjoint.data[a + 2];
        if (g0 == 0 && g1 == 0 && g2 == 0) continue;
        for (int64_t k = offsets[px]; k < offsets[px + 1]; ++k) {
            const size_t i = static_cast<size_t>(texels[k]) * 3;
            const double w = weights[k];
            out.data[i] += w * g0;
            out.data[i + 1] += w * g1;
            out.data[i + 2] += w * g2;
        }
    }
    return out;
}

RenderTaps mirror_taps(int env_width, int env_height,
                       const SphereGeometry &geom) {
    TapAccumulator acc(static_cast<size_t>(geom.width) * geom.height);
    for (int y = 0; y < geom.height; ++y)
        for (int x = 0; x < geom.width; ++x) {
            if (geom.mask.at(x, y) <= 0) continue;
            const size_t px = static_cast<size_t>(y) * geom.width + x;
            const Vec3 r =
                reflect(geom.view_dirs.get(x, y), geom.normals.get(x, y));
            double u_px, v_px;
            dir_to_pixel(r, env_width, env_height, u_px, v_px);
            push_bilinear(acc.texels[px], acc.weights[px], env_width,
                          env_height, u_px, v_px, 1.0);
        }
    return pack_taps(env_width, env_height, geom.width, geom.height,
                     std::move(acc));
}

RenderTaps diffuse_taps(const HdriMap &env, const SphereGeometry &geom,
                        int samples, uint64_t seed) {
    if (samples < 1) throw InputError("diffuse_taps: samples must be >= 1");
    const LuminanceTable table = build_luminance_table(env);
    const size_t cells = table.lum_area.size();
    TapAccumulator acc(static_cast<size_t>(geom.width) * geom.height);

    parallel_for(0, geom.height, [&](int y) {
        std::vector<double> cdf(cells);
        for (int x = 0; x < geom.width; ++x) {
            if (geom.mask.at(x, y) <= 0) continue;
            const size_t px = static_cast<size_t>(y) * geom.width + x;
            const Vec3 n = geom.normals.get(x, y);

            // per-pixel product weights: cos at cell center x luminance
            double total = 0;
            for (size_t i = 0; i < cells; ++i) {
                const double c = std::max(0.0, dot(n, table.dirs[i]));
                total += c * table.lum_area[i];
                cdf[i] = total;
            }
            bool cosine_only = !(total > 0);
            if (cosine_only) {
                total = 0;
                for (size_t i = 0; i < cells; ++i) {
                    const double c = std::max(0.0, dot(n, table.dirs[i]));
                    total += c * table.domega[i];
                    cdf[i] = total;
                }
            }

            Rng rng(mix_seed(seed, px));
            for (int s = 0; s < samples; ++s) {
                // stratified over the cdf: cells carrying >= 1/S of the mass
                // are visited every call, which keeps the per-coefficient
                // gradient variance low enough for Adam
                const double pick =
                    (s + rng.next_double()) * total / samples;
                size_t cell = std::min(
                    cells - 1,
                    static_cast<size_t>(
                        std::lower_bound(cdf.begin(), cdf.end(), pick) -
                        cdf.begin()));
                // zero-weight cells can be hit on exact cdf boundaries
                while (cell + 1 < cells &&
                       cdf[cell] - (cell ? cdf[cell - 1] : 0.0) <= 0.0)
                    ++cell;
                // factor = cos_cell / (pi * S * pdf_cell) with pdf =
                // (w/total)/domega; the cell-center cosine cancels against
                // the weight, which is what keeps a constant env exact.
                const double factor =
                    cosine_only ? total / (kPi * samples)
                                : table.domega[cell] * total /
                                      (kPi * samples * table.lum_area[cell]);
                const int cx =
                    static_cast<int>(cell % static_cast<size_t>(table.width));
                const int cy =
                    static_cast<int>(cell / static_cast<size_t>(table.width));
                // sub-cell jitter, uniform in solid angle
                const double u = (cx + rng.next_double()) / table.width;
                const double ct = table.cos_top[cy] +
                                  (table.cos_bot[cy] - table.cos_top[cy]) *
                                      rng.next_double();
                const double v = std::acos(std::clamp(ct, -1.0, 1.0)) / kPi;
                push_bilinear(acc.texels[px], acc.weights[px], env.width,
                              env.height, u * env.width, v * env.height,
                              factor);
            }
        }
    });
    return pack_taps(env.width, env.height, geom.width, geom.height,
                     std::move(acc));
}

RenderTaps lobe_taps(int env_width, int env_height, const SphereGeometry &geom,
                     double exponent, int samples, uint64_t seed) {
    if (samples < 1) throw InputError("lobe_taps: samples must be >= 1");
    if (!(exponent > 0)) throw InputError("lobe_taps: exponent must be > 0");
    TapAccumulator acc(static_cast<size_t>(geom.width) * geom.height);
    const double inv_s = 1.0 / samples;

    parallel_for(0, geom.height, [&](int y) {
        for (int x = 0; x < geom.width; ++x) {
            if (geom.mask.at(x, y) <= 0) continue;
            const size_t px = static_cast<size_t>(y) * geom.width + x;
            const Vec3 axis =
                reflect(geom.view_dirs.get(x, y), geom.normals.get(x, y));
            Vec3 t, b;
            make_basis(axis, t, b);
            Rng rng(mix_seed(seed, px));
            for (int s = 0; s < samples; ++s) {
                // cosine-power lobe importance sampling; the lobe pdf
                // cancels, so each sample contributes L(r)/S.
                const double ca =
                    std::pow(rng.next_double(), 1.0 / (exponent + 1.0));
                const double sa = std::sqrt(std::max(0.0, 1.0 - ca * ca));
                const double phi = 2.0 * kPi * rng.next_double();
                const Vec3 dir = normalize(axis * ca +
                                           t * (sa * std::cos(phi)) +
                                           b * (sa * std::sin(phi)));
                double u_px, v_px;
                dir_to_pixel(dir, env_width, env_height, u_px, v_px);
                push_bilinear(acc.texels[px], acc.weights[px], env_width,
                              env_height, u_px, v_px, inv_s);
            }
        }
    });
    return pack_taps(env_width, env_height, geom.width, geom.height,
                     std::move(acc));
}

RenderTaps build_taps(const HdriMap &env, const SphereGeometry &geom,
                      const Material &material, int samples, uint64_t seed) {
    switch (material.kind) {
        case MaterialKind::mirror:
            return mirror_taps(env.width, env.height, geom);
        case MaterialKind::diffuse:
            return diffuse_taps(env, geom, samples, seed);
        case MaterialKind::glossy:
        case MaterialKind::matte:
            return lobe_taps(env.width, env.height, geom,
                             material.lobe_exponent, samples, seed);
    }
    throw InputError("build_taps: unknown material");
}

namespace {

SphereImage make_sphere_image(const Image3 &pixels, const SphereGeometry &geom) {
    SphereImage img;
    img.pixels = pixels;
    img.mask = geom.mask;
    img.normals = geom.normals;
    img.view_dirs = geom.view_dirs;
    return img;
}

}  // namespace

SphereImage render_mirror(const HdriMap &env, const SphereGeometry &geom) {
    return make_sphere_image(
        mirror_taps(env.width, env.height, geom).apply(env), geom);
}

SphereImage render_diffuse(const HdriMap &env, const SphereGeometry &geom,
                           int samples, uint64_t seed) {
    return make_sphere_image(
        diffuse_taps(env, geom, samples, seed).apply(env), geom);
}

SphereImage render_eval_material(const HdriMap &env, const SphereGeometry &geom,
                                 const Material &material, int samples,
                                 uint64_t seed) {
    if (material.kind != MaterialKind::glossy &&
        material.kind != MaterialKind::matte)
        throw InputError("render_eval_material: expects glossy or matte");
    return make_sphere_image(
        lobe_taps(env.width, env.height, geom, material.lobe_exponent, samples,
                  seed)
            .apply(env),
        geom);
}

SphereImage render_material(const HdriMap &env, const SphereGeometry &geom,
                            const Material &material, int samples,
                            uint64_t seed) {
    return make_sphere_image(
        build_taps(env, geom, material, samples, seed).apply(env), geom);
}

RenderChain forward_chain_env(HdriMap env, const RenderTaps &taps, int ev) {
    RenderChain chain;
    chain.env = std::move(env);
    if (chain.env.width != taps.env_width || chain.env.height != taps.env_height)
        throw InputError("forward_chain: taps do not match env dimensions");
    chain.linear = taps.apply(chain.env);
    chain.exposed = apply_exposure(chain.linear, ev);
    chain.srgb = srgb_encode_unclipped(chain.exposed);
    return chain;
}

RenderChain forward_chain(const LaplacianPyramid &pyramid,
                          const RenderTaps &taps, int ev) {
    return forward_chain_env(pyramid_compose(pyramid), taps, ev);
}

LaplacianPyramid backward_chain(const RenderChain &chain,
                                const LaplacianPyramid &pyramid,
                                const RenderTaps &taps, int ev,
                                const Image3 &adjoint_srgb) {
    if (!all_finite(adjoint_srgb))
        throw NumericalError("backward_chain: non-finite adjoint");
    if (adjoint_srgb.width != taps.image_width ||
        adjoint_srgb.height != taps.image_height)
        throw InputError("backward_chain: adjoint does not match render size");

    // d srgb / d exposed, then d exposed / d linear = 2^ev
    Image3 g_linear(adjoint_srgb.width, adjoint_srgb.height);
    const double scale = ev_scale(ev);
    for (size_t i = 0; i < g_linear.data.size(); ++i) {
        const double a = adjoint_srgb.data[i];
        g_linear.data[i] =
            a == 0 ? 0.0 : a * srgb_encode_deriv(chain.exposed.data[i]) * scale;
    }
    // through the render and 2^x
    Image3 g_env = taps.apply_transpose(g_linear);
    for (size_t i = 0; i < g_env.data.size(); ++i)
        g_env.data[i] *= kLn2 * chain.env.data[i];
    return pyramid_reconstruct_transpose(g_env, pyramid.level_count());
}

LaplacianPyramid grad_render(const LaplacianPyramid &pyramid,
                             const RenderTaps &taps, int ev,
                             const Image3 &adjoint_srgb) {
    const RenderChain chain = forward_chain(pyramid, taps, ev);
    return backward_chain(chain, pyramid, taps, ev, adjoint_srgb);
}

}  // namespace probefuse
