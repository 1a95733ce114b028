// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#include "probefuse/color.hpp"

#include <algorithm>
#include <cmath>

namespace probefuse {

Vec3 apply_exposure(const Vec3 &rgb, int ev) {
    return rgb * ev_scale(ev);
}

Image3 apply_exposure(const Image3 &img, int ev) {
    Image3 out = img;
    const double s = ev_scale(ev);
    for (double &v : out.data) v *= s;
    return out;
}

double srgb_encode_unclipped(double linear) {
    if (linear <= 0.0031308) return 12.92 * linear;
    return 1.055 * std::pow(linear, 1.0 / 2.4) - 0.055;
}

double srgb_encode(double linear) {
    return std::clamp(srgb_encode_unclipped(linear), 0.0, 1.0);
}

double srgb_decode(double encoded) {
    if (encoded <= 0.04045) return encoded / 12.92;
    return std::pow((encoded + 0.055) / 1.055, 2.4);
}

double srgb_encode_deriv(double linear) {
    if (linear <= 0.0031308) return 12.92;
    return (1.055 / 2.4) * std::pow(linear, 1.0 / 2.4 - 1.0);
}

Image3 srgb_encode(const Image3 &linear) {
    Image3 out = linear;
    for (double &v : out.data) v = srgb_encode(v);
    return out;
}

Image3 srgb_encode_unclipped(const Image3 &linear) {
    Image3 out = linear;
    for (double &v : out.data) v = srgb_encode_unclipped(v);
    return out;
}

Image3 srgb_decode(const Image3 &encoded) {
    Image3 out = encoded;
    for (double &v : out.data) v = srgb_decode(v);
    return out;
}

double luminance(const Vec3 &rgb) {
    return 0.2126 * rgb.x + 0.7152 * rgb.y + 0.0722 * rgb.z;
}

}  // namespace probefuse
