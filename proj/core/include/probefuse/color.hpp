// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "probefuse/image.hpp"

namespace probefuse {

// Exposure values are integer stops; EV e scales linear radiance by 2^e.
// The default bracket set is {0, -3, -6, -9, -12}.
inline const int kDefaultEvSet[5] = {0, -3, -6, -9, -12};

inline double ev_scale(int ev) { return std::exp2(static_cast<double>(ev)); }

Vec3 apply_exposure(const Vec3 &rgb, int ev);
Image3 apply_exposure(const Image3 &img, int ev);

// IEC 61966-2-1 transfer. The clipped variant models an LDR sensor and is
// what observations use; the unclipped variant extends the power-law branch
// above 1 so the optimization keeps a usable gradient on over-bright
// predictions.
double srgb_encode(double linear);            // clipped to [0,1]
double srgb_encode_unclipped(double linear);  // monotone beyond 1
double srgb_decode(double encoded);
double srgb_encode_deriv(double linear);      // derivative of the unclipped transfer

Image3 srgb_encode(const Image3 &linear);
Image3 srgb_encode_unclipped(const Image3 &linear);
Image3 srgb_decode(const Image3 &encoded);

// Rec.709 luma weights: 0.2126 R + 0.7152 G + 0.0722 B.
double luminance(const Vec3 &rgb);

}  // namespace probefuse
