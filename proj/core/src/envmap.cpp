// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#include "probefuse/envmap.hpp"

#include <algorithm>
#include <cmath>

namespace probefuse {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

int wrap_index(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

int clamp_index(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

}  // namespace

Vec3 pixel_to_dir(double u, double v) {
    const double theta = kPi * v;
    const double phi = kTwoPi * (u - 0.5);
    const double st = std::sin(theta);
    return {st * std::sin(phi), std::cos(theta), -st * std::cos(phi)};
}

void dir_to_pixel(const Vec3 &d, int width, int height, double &u_px,
                  double &v_px) {
    double u = std::atan2(d.x, -d.z) * (0.5 / kPi) + 0.5;
    if (u >= 1.0) u -= 1.0;
    if (u < 0.0) u += 1.0;
    const double v = std::acos(std::clamp(d.y, -1.0, 1.0)) / kPi;
    u_px = u * width;
    v_px = v * height;
}

Image1 solid_angle_map(int width, int height) {
    if (width != 2 * height || height < 1)
        throw InputError("solid_angle_map: width must equal 2*height");
    Image1 out(width, height);
    for (int y = 0; y < height; ++y) {
        // Exact area of the spherical band a row covers, divided evenly
        // over its W texels. Sums to 4*pi at any resolution.
        const double band = (kTwoPi / width) *
                            (std::cos(kPi * y / height) -
                             std::cos(kPi * (y + 1) / height));
        for (int x = 0; x < width; ++x) out.at(x, y) = band;
    }
    return out;
}

BilinearTaps bilinear_taps(int width, int height, double u_px, double v_px) {
    const double fu = u_px - 0.5;
    const double fv = v_px - 0.5;
    const int xi = static_cast<int>(std::floor(fu));
    const int yi = static_cast<int>(std::floor(fv));
    const double wx = fu - xi;
    const double wy = fv - yi;
    const int x0 = wrap_index(xi, width);
    const int x1 = wrap_index(xi + 1, width);
    const int y0 = clamp_index(yi, height);
    const int y1 = clamp_index(yi + 1, height);
    BilinearTaps t;
    t.texel[0] = y0 * width + x0;
    t.texel[1] = y0 * width + x1;
    t.texel[2] = y1 * width + x0;
    t.texel[3] = y1 * width + x1;
    t.weight[0] = (1 - wx) * (1 - wy);
    t.weight[1] = wx * (1 - wy);
    t.weight[2] = (1 - wx) * wy;
    t.weight[3] = wx * wy;
    return t;
}

Vec3 bilinear_sample(const Image3 &map, double u_px, double v_px) {
    const BilinearTaps t = bilinear_taps(map.width, map.height, u_px, v_px);
    Vec3 out{0, 0, 0};
    for (int k = 0; k < 4; ++k) {
        const size_t i = static_cast<size_t>(t.texel[k]) * 3;
        out += Vec3{map.data[i], map.data[i + 1], map.data[i + 2]} * t.weight[k];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Laplacian pyramid
//
// Downsampling blurs with the binomial [1,4,6,4,1]/16 and decimates by 2;
// upsampling zero-inserts and filters with the same kernel at gain 2 per
// axis, which reduces to the two phases below. Horizontal boundaries wrap
// (cyclic azimuth), vertical boundaries clamp (no pole wrap).
// ---------------------------------------------------------------------------

namespace {

Image3 upsample_rows(const Image3 &src, int out_w) {
    const int m = src.width;
    Image3 out(out_w, src.height);
    for (int y = 0; y < src.height; ++y) {
        for (int x = 0; x < out_w; ++x) {
            Vec3 v;
            if ((x & 1) == 0) {
                const int i = x / 2;
                v = (src.get(wrap_index(i - 1, m), y) +
                     src.get(i, y) * 6.0 +
                     src.get(wrap_index(i + 1, m), y)) / 8.0;
            } else {
                const int i = (x - 1) / 2;
                v = (src.get(i, y) + src.get(wrap_index(i + 1, m), y)) * 0.5;
            }
            out.set(x, y, v);
        }
    }
    return out;
}

Image3 upsample_rows_transpose(const Image3 &grad, int src_w) {
    Image3 out(src_w, grad.height);
    for (int y = 0; y < grad.height; ++y) {
        for (int x = 0; x < grad.width; ++x) {
            const Vec3 g = grad.get(x, y);
            if ((x & 1) == 0) {
                const int i = x / 2;
                out.set(wrap_index(i - 1, src_w), y,
                        out.get(wrap_index(i - 1, src_w), y) + g * (1.0 / 8.0));
                out.set(i, y, out.get(i, y) + g * (6.0 / 8.0));
                out.set(wrap_index(i + 1, src_w), y,
                        out.get(wrap_index(i + 1, src_w), y) + g * (1.0 / 8.0));
            } else {
                const int i = (x - 1) / 2;
                out.set(i, y, out.get(i, y) + g * 0.5);
                out.set(wrap_index(i + 1, src_w), y,
                        out.get(wrap_index(i + 1, src_w), y) + g * 0.5);
            }
        }
    }
    return out;
}

Image3 upsample_cols(const Image3 &src, int out_h) {
    const int m = src.height;
    Image3 out(src.width, out_h);
    for (int y = 0; y < out_h; ++y) {
        if ((y & 1) == 0) {
            const int i = y / 2;
            const int ia = clamp_index(i - 1, m);
            const int ib = clamp_index(i + 1, m);
            for (int x = 0; x < src.width; ++x)
                out.set(x, y, (src.get(x, ia) + src.get(x, i) * 6.0 +
                               src.get(x, ib)) / 8.0);
        } else {
            const int i = (y - 1) / 2;
            const int ib = clamp_index(i + 1, m);
            for (int x = 0; x < src.width; ++x)
                out.set(x, y, (src.get(x, i) + src.get(x, ib)) * 0.5);
        }
    }
    return out;
}

Image3 upsample_cols_transpose(const Image3 &grad, int src_h) {
    Image3 out(grad.width, src_h);
    for (int y = 0; y < grad.height; ++y) {
        if ((y & 1) == 0) {
            const int i = y / 2;
            const int ia = clamp_index(i - 1, src_h);
            const int ib = clamp_index(i + 1, src_h);
            for (int x = 0; x < grad.width; ++x) {
                const Vec3 g = grad.get(x, y);
                out.set(x, ia, out.get(x, ia) + g * (1.0 / 8.0));
                out.set(x, i, out.get(x, i) + g * (6.0 / 8.0));
                out.set(x, ib, out.get(x, ib) + g * (1.0 / 8.0));
            }
        } else {
            const int i = (y - 1) / 2;
            const int ib = clamp_index(i + 1, src_h);
            for (int x = 0; x < grad.width; ++x) {
                const Vec3 g = grad.get(x, y);
                out.set(x, i, out.get(x, i) + g * 0.5);
                out.set(x, ib, out.get(x, ib) + g * 0.5);
            }
        }
    }
    return out;
}

Image3 downsample_rows(const Image3 &src) {
    static const double k[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16,
                                1.0 / 16};
    const int m = src.width;
    const int out_w = (m + 1) / 2;
    Image3 out(out_w, src.height);
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < out_w; ++x) {
            Vec3 v;
            for (int t = -2; t <= 2; ++t)
                v += src.get(wrap_index(2 * x + t, m), y) * k[t + 2];
            out.set(x, y, v);
        }
    return out;
}

Image3 downsample_cols(const Image3 &src) {
    static const double k[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16,
                                1.0 / 16};
    const int m = src.height;
    const int out_h = (m + 1) / 2;
    Image3 out(src.width, out_h);
    for (int y = 0; y < out_h; ++y)
        for (int t = -2; t <= 2; ++t) {
            const int sy = clamp_index(2 * y + t, m);
            for (int x = 0; x < src.width; ++x)
                out.set(x, y, out.get(x, y) + src.get(x, sy) * k[t + 2]);
        }
    return out;
}

}  // namespace

Image3 pyramid_upsample(const Image3 &src, int out_width, int out_height) {
    return upsample_cols(upsample_rows(src, out_width), out_height);
}

Image3 pyramid_upsample_transpose(const Image3 &grad, int src_width,
                                  int src_height) {
    return upsample_rows_transpose(upsample_cols_transpose(grad, src_height),
                                   src_width);
}

Image3 pyramid_downsample(const Image3 &src) {
    return downsample_cols(downsample_rows(src));
}

void pyramid_level_dims(int base_width, int base_height, int level, int &w,
                        int &h) {
    w = base_width;
    h = base_height;
    for (int i = 0; i < level; ++i) {
        w = std::max(1, (w + 1) / 2);
        h = std::max(1, (h + 1) / 2);
    }
}

LaplacianPyramid make_constant_pyramid(int base_width, int base_height,
                                       int levels, double coarsest_value) {
    if (levels < 1) throw InputError("pyramid: level count must be >= 1");
    LaplacianPyramid p;
    p.base_width = base_width;
    p.base_height = base_height;
    p.levels.reserve(levels);
    for (int i = 0; i < levels; ++i) {
        int w, h;
        pyramid_level_dims(base_width, base_height, i, w, h);
        p.levels.emplace_back(w, h, i == levels - 1 ? coarsest_value : 0.0);
    }
    return p;
}

Image3 pyramid_reconstruct_log2(const LaplacianPyramid &p) {
    const int n = p.level_count();
    if (n < 1) throw InputError("pyramid: empty");
    Image3 g = p.levels[n - 1];
    for (int k = n - 2; k >= 0; --k) {
        const Image3 &res = p.levels[k];
        Image3 up = pyramid_upsample(g, res.width, res.height);
        for (size_t i = 0; i < up.data.size(); ++i) up.data[i] += res.data[i];
        g = std::move(up);
    }
    return g;
}

HdriMap pyramid_compose(const LaplacianPyramid &p) {
    for (const Image3 &lvl : p.levels)
        if (!all_finite(lvl))
            throw NumericalError("pyramid_compose: non-finite coefficient");
    Image3 log2img = pyramid_reconstruct_log2(p);
    HdriMap out(log2img.width, log2img.height);
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = std::exp2(log2img.data[i]);
    return out;
}

LaplacianPyramid pyramid_decompose(const HdriMap &map, int levels) {
    if (levels < 1) throw InputError("pyramid_decompose: levels must be >= 1");
    for (double v : map.data)
        if (!(v > 0.0) || !std::isfinite(v))
            throw InputError("pyramid_decompose: texels must be > 0");
    Image3 g(map.width, map.height);
    for (size_t i = 0; i < g.data.size(); ++i)
        g.data[i] = std::log2(map.data[i]);

    LaplacianPyramid p;
    p.base_width = map.width;
    p.base_height = map.height;
    p.levels.reserve(levels);
    for (int k = 0; k < levels - 1; ++k) {
        Image3 down = pyramid_downsample(g);
        Image3 up = pyramid_upsample(down, g.width, g.height);
        Image3 residual(g.width, g.height);
        for (size_t i = 0; i < g.data.size(); ++i)
            residual.data[i] = g.data[i] - up.data[i];
        p.levels.push_back(std::move(residual));
        g = std::move(down);
    }
    p.levels.push_back(std::move(g));
    return p;
}

LaplacianPyramid pyramid_reconstruct_transpose(const Image3 &grad_log2,
                                               int levels) {
    LaplacianPyramid out;
    out.base_width = grad_log2.width;
    out.base_height = grad_log2.height;
    out.levels.reserve(levels);
    Image3 g = grad_log2;
    for (int k = 0; k < levels - 1; ++k) {
        out.levels.push_back(g);
        int w, h;
        pyramid_level_dims(grad_log2.width, grad_log2.height, k + 1, w, h);
        g = pyramid_upsample_transpose(g, w, h);
    }
    out.levels.push_back(std::move(g));
    return out;
}

}  // namespace probefuse
