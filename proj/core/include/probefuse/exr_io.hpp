// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "probefuse/image.hpp"

namespace probefuse {

// Scanline OpenEXR, ZIP compressed. Recovered environments are written as
// float32 (optimization artifacts), synthetic observations as half (the
// renders-as-float16 convention). Read always promotes to the internal
// double image. Malformed files throw InputError with the path and reason.

enum class ExrPrecision { half, float32 };

void write_exr_rgb(const std::string &path, const Image3 &img,
                   ExrPrecision precision);
Image3 read_exr_rgb(const std::string &path);

// Single-channel (depth etc.); written as float32 channel "Z", read accepts
// Z, Y, R, or the file's only channel.
void write_exr_scalar(const std::string &path, const Image1 &img);
Image1 read_exr_scalar(const std::string &path);

}  // namespace probefuse
