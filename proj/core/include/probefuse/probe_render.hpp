// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "probefuse/envmap.hpp"
#include "probefuse/geom_maps.hpp"

namespace probefuse {

// mirror/diffuse are the two optimization materials; glossy/matte are
// forward-only cosine-power lobes used by the evaluation metrics.
enum class MaterialKind { mirror, diffuse, glossy, matte };

struct Material {
    MaterialKind kind = MaterialKind::mirror;
    double lobe_exponent = 0;  // glossy/matte only

    static Material mirror() { return {MaterialKind::mirror, 0}; }
    static Material diffuse() { return {MaterialKind::diffuse, 0}; }
    static Material glossy(double exponent = 512) {
        return {MaterialKind::glossy, exponent};
    }
    static Material matte(double exponent = 32) {
        return {MaterialKind::matte, exponent};
    }
};

std::string to_string(MaterialKind kind);
MaterialKind material_from_string(const std::string &name);

// Normalized importance table over the texels of an environment map for a
// single receiver normal: w_i proportional to max(0, n.r_i) * luminance_i *
// area_i, pdf_i = w_i / domega_i. Falls back to cosine-only weights when
// the visible hemisphere carries no radiance.
struct SamplingTable {
    int width = 0, height = 0;
    std::vector<double> weights;  // normalized, sums to 1
    std::vector<double> pdf;      // per solid angle
    std::vector<double> cdf;      // over flattened texels, ends at 1
};

SamplingTable build_sampling_table(const HdriMap &env, const Vec3 &normal);

// Shared per-environment luminance table, built once per optimizer step:
// integrated luminance per cell of a (possibly coarser) grid plus cell
// geometry. The per-pixel cosine factor is applied analytically at sample
// time, so memory stays O(texels) instead of O(pixels x texels).
struct LuminanceTable {
    int width = 0, height = 0;  // table grid
    int factor = 1;             // env texels per table cell, per axis
    std::vector<double> lum_area;  // integral of luminance over each cell
    std::vector<Vec3> dirs;        // cell center directions
    std::vector<double> domega;    // cell solid angles
    std::vector<double> cos_top;   // per row: cos(theta) at the top edge
    std::vector<double> cos_bot;   //          and at the bottom edge
};

LuminanceTable build_luminance_table(const HdriMap &env);

// A renderer output expressed as a sparse linear map from environment
// texels to image pixels (CSR over image pixels, weights shared across
// channels). Forward rendering is apply(); the exact gradient of the render
// with respect to the environment is apply_transpose(). The sample set is
// frozen into the taps, which is what makes the Monte Carlo renders
// differentiable with the sampling distribution detached.
struct RenderTaps {
    int env_width = 0, env_height = 0;
    int image_width = 0, image_height = 0;
    std::vector<int64_t> offsets;    // size image_width*image_height + 1
    std::vector<uint32_t> texels;    // flat env texel indices
    std::vector<double> weights;

    Image3 apply(const Image3 &env) const;
    Image3 apply_transpose(const Image3 &adjoint) const;
};

// Perfect mirror: one bilinear lookup along the reflected view ray per
// pixel. Independent of the env content.
RenderTaps mirror_taps(int env_width, int env_height,
                       const SphereGeometry &geom);

// Perfect diffuse (albedo 1): per-pixel estimate of (1/pi) * integral of
// L(r) max(0, n.r) over the sphere, importance-sampled from the product of
// the shared luminance table and the pixel's cosine. Each sample draws a
// table cell, jitters inside it uniformly in solid angle, and lands on four
// bilinear taps of the full-resolution env. Deterministic given seed.
RenderTaps diffuse_taps(const HdriMap &env, const SphereGeometry &geom,
                        int samples, uint64_t seed);

// Energy-normalized cosine-power lobe around the reflected direction
// (glossy/matte). Lobe-importance sampled, so a constant env renders to
// itself exactly.
RenderTaps lobe_taps(int env_width, int env_height, const SphereGeometry &geom,
                     double exponent, int samples, uint64_t seed);

RenderTaps build_taps(const HdriMap &env, const SphereGeometry &geom,
                      const Material &material, int samples, uint64_t seed);

struct SphereImage {
    Image3 pixels;     // linear radiance, zero off mask
    Image1 mask;
    Image3 normals;
    Image3 view_dirs;
};

SphereImage render_mirror(const HdriMap &env, const SphereGeometry &geom);
SphereImage render_diffuse(const HdriMap &env, const SphereGeometry &geom,
                           int samples, uint64_t seed);
SphereImage render_eval_material(const HdriMap &env, const SphereGeometry &geom,
                                 const Material &material, int samples,
                                 uint64_t seed);
SphereImage render_material(const HdriMap &env, const SphereGeometry &geom,
                            const Material &material, int samples,
                            uint64_t seed);

// Forward pass of the optimization chain for one observation:
// pyramid -> 2^x -> render -> exposure -> sRGB (unclipped; clipping lives in
// the observation model).
struct RenderChain {
    HdriMap env;       // composed linear environment
    Image3 linear;     // rendered sphere, linear radiance
    Image3 exposed;    // 2^ev * linear
    Image3 srgb;       // unclipped sRGB encoding of exposed
};

RenderChain forward_chain(const LaplacianPyramid &pyramid,
                          const RenderTaps &taps, int ev);

// Same, reusing an already-composed environment.
RenderChain forward_chain_env(HdriMap env, const RenderTaps &taps, int ev);

// Pulls an sRGB-space adjoint back through the chain onto the pyramid
// coefficients. Throws NumericalError on a non-finite adjoint.
LaplacianPyramid backward_chain(const RenderChain &chain,
                                const LaplacianPyramid &pyramid,
                                const RenderTaps &taps, int ev,
                                const Image3 &adjoint_srgb);

LaplacianPyramid grad_render(const LaplacianPyramid &pyramid,
                             const RenderTaps &taps, int ev,
                             const Image3 &adjoint_srgb);

}  // namespace probefuse
