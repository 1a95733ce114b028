// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace probefuse {

// Thrown on contract violations in inputs (bad files, bad arguments, bad
// schemas). The CLI maps this to exit code 1.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a computation goes numerically bad (NaN forward pass,
// diverging optimization). The CLI maps this to exit code 2.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3 operator*(const Vec3 &o) const { return {x * o.x, y * o.y, z * o.z}; }
    Vec3 &operator+=(const Vec3 &o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    Vec3 operator-() const { return {-x, -y, -z}; }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator*(double s, const Vec3 &v) { return v * s; }

inline double dot(const Vec3 &a, const Vec3 &b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline double norm(const Vec3 &v) { return std::sqrt(dot(v, v)); }

inline Vec3 cross(const Vec3 &a, const Vec3 &b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z,
            a.x * b.y - a.y * b.x};
}

inline Vec3 normalize(const Vec3 &v) {
    double n = norm(v);
    return n > 0 ? v / n : Vec3{0, 0, 0};
}

// r = v - 2 (v.n) n
inline Vec3 reflect(const Vec3 &v, const Vec3 &n) {
    return v - 2.0 * dot(v, n) * n;
}

inline bool is_finite(const Vec3 &v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

// Row-major interleaved RGB image, double precision throughout the numeric
// core; conversion to float/half happens only at the file boundary.
struct Image3 {
    int width = 0, height = 0;
    std::vector<double> data;  // size width*height*3

    Image3() = default;
    Image3(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<size_t>(w) * h * 3, fill) {}

    size_t pixel_count() const { return static_cast<size_t>(width) * height; }

    double &at(int x, int y, int c) {
        return data[(static_cast<size_t>(y) * width + x) * 3 + c];
    }
    double at(int x, int y, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * 3 + c];
    }
    Vec3 get(int x, int y) const {
        size_t i = (static_cast<size_t>(y) * width + x) * 3;
        return {data[i], data[i + 1], data[i + 2]};
    }
    void set(int x, int y, const Vec3 &v) {
        size_t i = (static_cast<size_t>(y) * width + x) * 3;
        data[i] = v.x;
        data[i + 1] = v.y;
        data[i + 2] = v.z;
    }
    bool same_size(const Image3 &o) const {
        return width == o.width && height == o.height;
    }
};

// Single channel image (depth, masks, solid angles, ...).
struct Image1 {
    int width = 0, height = 0;
    std::vector<double> data;

    Image1() = default;
    Image1(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    double &at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    double at(int x, int y) const {
        return data[static_cast<size_t>(y) * width + x];
    }
    bool same_size(const Image1 &o) const {
        return width == o.width && height == o.height;
    }
};

inline bool all_finite(const Image3 &img) {
    for (double v : img.data)
        if (!std::isfinite(v)) return false;
    return true;
}

inline bool all_finite(const Image1 &img) {
    for (double v : img.data)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace probefuse
