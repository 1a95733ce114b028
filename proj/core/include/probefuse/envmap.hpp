// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "probefuse/image.hpp"

namespace probefuse {

// Equirectangular environment map holding linear relative radiance.
// Convention used everywhere in this project (the camera frame doubles as
// the environment frame):
//
//   row 0            -> zenith (+y), bottom row -> nadir (-y)
//   column W/2       -> camera forward (-z)
//   u in [0,1), v in [0,1]: theta = pi*v, phi = 2*pi*(u - 0.5)
//   dir(u, v) = (sin(theta) sin(phi), cos(theta), -sin(theta) cos(phi))
//
// y-up, right handed, x to the right. Valid maps have width == 2*height and
// finite non-negative values.
using HdriMap = Image3;

inline bool is_valid_hdri(const HdriMap &m) {
    if (m.width != 2 * m.height || m.height < 1) return false;
    for (double v : m.data)
        if (!(v >= 0.0) || !std::isfinite(v)) return false;
    return true;
}

// u, v are normalized coordinates in [0,1). Returns a unit direction.
Vec3 pixel_to_dir(double u, double v);

// Inverse of pixel_to_dir, scaled to continuous pixel coordinates for a
// width x height map (texel (i,j) has center (i+0.5, j+0.5)).
void dir_to_pixel(const Vec3 &d, int width, int height, double &u_px,
                  double &v_px);

// Per-texel solid angle in steradians. Uses the exact spherical band area
// (2*pi/W) * (cos(theta_top) - cos(theta_bottom)) per row, so the map sums
// to 4*pi at every resolution.
Image1 solid_angle_map(int width, int height);

// The four texels and weights referenced by a bilinear sample at continuous
// pixel coordinates (u_px, v_px): horizontal circular wrap, vertical clamp.
// Weights sum to 1.
struct BilinearTaps {
    int texel[4];     // flat texel index y*W+x
    double weight[4];
};
BilinearTaps bilinear_taps(int width, int height, double u_px, double v_px);

Vec3 bilinear_sample(const Image3 &map, double u_px, double v_px);

// Multi-level residual decomposition of the log2-radiance image, coarsest
// level last. The optimization variable of the HDRI fusion.
struct LaplacianPyramid {
    std::vector<Image3> levels;
    int base_width = 0, base_height = 0;

    int level_count() const { return static_cast<int>(levels.size()); }
};

// Dimensions of level i: ceil(base / 2^i), clamped to >= 1.
void pyramid_level_dims(int base_width, int base_height, int level,
                        int &w, int &h);

// All levels zero except the coarsest, which is set to coarsest_value.
// compose() of the result is the constant map 2^coarsest_value.
LaplacianPyramid make_constant_pyramid(int base_width, int base_height,
                                       int levels, double coarsest_value);

// Reconstructs the log2-radiance image by repeated upsample-and-add.
Image3 pyramid_reconstruct_log2(const LaplacianPyramid &p);

// Reconstruction mapped back to linear radiance (2^x per channel).
// Throws NumericalError on non-finite coefficients.
HdriMap pyramid_compose(const LaplacianPyramid &p);

// Burt-Adelson analysis of log2(map) with the [1,4,6,4,1]/16 binomial
// filter, horizontal circular padding, vertical clamp. pyramid_compose
// inverts it exactly (up to round-off). Throws InputError if any texel <= 0.
LaplacianPyramid pyramid_decompose(const HdriMap &map, int levels);

// Adjoint of pyramid_reconstruct_log2 as a linear map: scatters a gradient
// with respect to the reconstructed log2 image back onto the levels.
LaplacianPyramid pyramid_reconstruct_transpose(const Image3 &grad_log2,
                                               int levels);

// Internal building blocks, exposed for tests (adjoint identities).
Image3 pyramid_upsample(const Image3 &src, int out_width, int out_height);
Image3 pyramid_upsample_transpose(const Image3 &grad, int src_width,
                                  int src_height);
Image3 pyramid_downsample(const Image3 &src);

}  // namespace probefuse
