// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "probefuse/image.hpp"

namespace probefuse {

// 8- or 16-bit PNG for display-referred images in [0,1]. Values are
// quantized as round(v * (2^depth - 1)); out-of-range input and unsupported
// bit depths throw InputError. Round trips are exact at matching depth.

void write_png(const std::string &path, const Image3 &img, int bit_depth = 8);
Image3 read_png(const std::string &path);

void write_png_gray(const std::string &path, const Image1 &img,
                    int bit_depth = 8);

}  // namespace probefuse
