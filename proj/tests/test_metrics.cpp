// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <utility>

#include "probefuse/color.hpp"
#include "probefuse/metrics.hpp"
#include "probefuse/rng.hpp"
#include "probefuse/synth.hpp"

using namespace probefuse;

namespace {
constexpr double kPi = 3.14159265358979323846;

Image1 full_mask(int w, int h) { return Image1(w, h, 1.0); }
}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("rmse basics") {
    Image3 a(16, 16, 0.5), b(16, 16, 0.5);
    const Image1 mask = full_mask(16, 16);
    CHECK(rmse(a, a, mask) == 0.0);
    for (double &v : b.data) v += 0.1;
    CHECK(rmse(a, b, mask) == doctest::Approx(0.1));

    // checkerboard {0,1} against constant 0.5
    Image3 check(16, 16), half(16, 16, 0.5);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
            check.set(x, y, Vec3{1, 1, 1} * ((x + y) % 2));
    CHECK(rmse(check, half, mask) == doctest::Approx(0.5));

    CHECK_THROWS_AS(rmse(a, b, Image1(16, 16, 0.0)), InputError);
}

TEST_CASE("rmse is permutation invariant within the mask") {
    Rng rng(2);
    Image3 a(8, 8), b(8, 8);
    for (double &v : a.data) v = rng.next_double();
    for (double &v : b.data) v = rng.next_double();
    const double base = rmse(a, b, full_mask(8, 8));
    // swap two pixel pairs in both images identically
    Image3 a2 = a, b2 = b;
    for (int c = 0; c < 3; ++c) {
        std::swap(a2.at(1, 2, c), a2.at(6, 7, c));
        std::swap(b2.at(1, 2, c), b2.at(6, 7, c));
    }
    CHECK(rmse(a2, b2, full_mask(8, 8)) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("si_rmse scale invariance and orthogonal fallback") {
    Rng rng(3);
    Image3 gt(16, 16);
    for (double &v : gt.data) v = 0.1 + rng.next_double();
    const Image1 mask = full_mask(16, 16);

    // (x, s*x) scores zero for any s > 0
    for (double s : {0.25, 1.0, 7.5}) {
        Image3 pred = gt;
        for (double &v : pred.data) v *= s;
        CHECK(si_rmse(pred, gt, mask) == doctest::Approx(0.0).epsilon(1e-12));
    }

    // invariance of the score itself under pred scaling
    Image3 pred = gt;
    for (double &v : pred.data) v = 0.1 + rng.next_double();
    const double base = si_rmse(pred, gt, mask);
    Image3 scaled = pred;
    for (double &v : scaled.data) v *= 13.7;
    CHECK(std::abs(si_rmse(scaled, gt, mask) - base) < 1e-9);

    // alpha* is optimal in linear space: rmse(alpha p, g) <= rmse(p, g)
    const double alpha = si_scale(pred, gt, mask);
    Image3 aligned = pred;
    for (double &v : aligned.data) v *= alpha;
    CHECK(rmse(aligned, gt, mask) <= rmse(pred, gt, mask) + 1e-12);

    // orthogonal prediction: alpha* = 0, score equals rmse(0, gt)
    Image3 ortho(2, 1), target(2, 1);
    ortho.set(0, 0, {1, 0, 0});
    target.set(0, 0, {0, 1, 0});
    const Image1 m2 = full_mask(2, 1);
    CHECK(si_scale(ortho, target, m2) == 0.0);
    CHECK(si_rmse(ortho, target, m2) ==
          doctest::Approx(rmse(Image3(2, 1, 0.0), srgb_encode(target), m2)));

    // identically zero prediction degrades to rmse(0, gt)
    CHECK(si_rmse(Image3(16, 16, 0.0), gt, mask) ==
          doctest::Approx(rmse(Image3(16, 16, 0.0), srgb_encode(gt), mask)));
}

TEST_CASE("ssim identities and degradation") {
    Rng rng(4);
    Image3 img(32, 32);
    for (double &v : img.data) v = rng.next_double();
    const Image1 mask = full_mask(32, 32);
    CHECK(ssim(img, img, mask) == doctest::Approx(1.0));

    // symmetry
    Image3 other(32, 32);
    for (double &v : other.data) v = rng.next_double();
    CHECK(ssim(img, other, mask) ==
          doctest::Approx(ssim(other, img, mask)).epsilon(1e-12));

    // monotone degradation under increasing noise
    double prev = 1.0;
    for (double sigma : {0.02, 0.08, 0.2}) {
        Image3 noisy = img;
        Rng nrng(7);
        for (double &v : noisy.data)
            v = std::clamp(v + sigma * nrng.next_gaussian(), 0.0, 1.0);
        const double s = ssim(img, noisy, mask);
        CHECK(s < prev);
        prev = s;
    }

    CHECK_THROWS_AS(ssim(Image3(8, 8, 0.5), Image3(8, 8, 0.5), full_mask(8, 8)),
                    InputError);
}

TEST_CASE("angular error anchors") {
    Image3 a(4, 4), b(4, 4);
    const Image1 mask = full_mask(4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            a.set(x, y, {1, 0, 0});
            b.set(x, y, {0, 1, 0});
        }
    CHECK(angular_error_deg(a, b, mask) == doctest::Approx(90.0).epsilon(1e-9));
    CHECK(angular_error_deg(a, a, mask) == doctest::Approx(0.0));

    // global tint is invisible to the angle
    Image3 tinted = a;
    for (double &v : tinted.data) v *= 3.7;
    CHECK(angular_error_deg(tinted, a, mask) ==
          doctest::Approx(0.0).epsilon(1e-9));

    CHECK_THROWS_AS(angular_error_deg(Image3(4, 4, 0.0), Image3(4, 4, 0.0), mask),
                    InputError);
}

TEST_CASE("dominant_direction finds the disk light") {
    AnalyticEnv scene;
    scene.ambient = {0.05, 0.05, 0.05};
    const Vec3 truth = normalize(Vec3{0.3, 0.5, -0.81});
    scene.lights.push_back({truth, 5.0 * kPi / 180.0, {1024, 1024, 1024}});
    const Vec3 got = dominant_direction(bake(scene, 256, 128));
    CHECK(std::acos(std::clamp(dot(got, truth), -1.0, 1.0)) * 180 / kPi < 1.0);
}

TEST_CASE("evaluate identity and scaling rows") {
    AnalyticEnv scene;
    scene.ambient = {0.2, 0.25, 0.3};
    scene.lights.push_back({normalize(Vec3{0.4, 0.5, -0.7}), 0.3, {6, 5, 4}});
    const HdriMap env = bake(scene, 128, 64);
    const CameraModel cam{64, 64, kPi / 3};
    const SphereSpec sphere{{0, 0, -3}, 0.7};

    const MetricsReport self =
        evaluate({env}, {env}, cam, sphere, 32, 11);
    for (const char *mat : {"mirror", "diffuse", "glossy", "matte"}) {
        const MaterialMetrics &m = self.aggregate.at(mat);
        CHECK(m.rmse <= 1e-3);
        CHECK(m.si_rmse <= 1e-3);
        CHECK(m.ssim >= 1.0 - 1e-3);
        CHECK(m.angular_error_deg <= 1e-3);
    }

    // doubled prediction: si_rmse stays ~0, rmse does not
    HdriMap twice = env;
    for (double &v : twice.data) v *= 2.0;
    const MetricsReport scaled = evaluate({twice}, {env}, cam, sphere, 32, 11);
    for (const char *mat : {"mirror", "diffuse"}) {
        CHECK(scaled.aggregate.at(mat).si_rmse < 2e-3);
        CHECK(scaled.aggregate.at(mat).rmse > 0.05);
    }

    CHECK_THROWS_AS(evaluate({env, env}, {env}, cam, sphere, 8, 0), InputError);
}

TEST_CASE("evaluate separates a rotated env by material") {
    // a small, barely-saturating disk: rotating it moves a high-contrast
    // speck in the mirror but only nudges the smooth irradiance the diffuse
    // sphere integrates
    AnalyticEnv scene;
    scene.ambient = {0.4, 0.4, 0.4};
    scene.lights.push_back(
        {normalize(Vec3{0.1, 0.3, 0.94}), 5 * kPi / 180.0, {1.5, 1.5, 1.5}});
    const HdriMap gt = bake(scene, 128, 64);
    const HdriMap pred = rotate_azimuth(gt, kPi / 2);
    const CameraModel cam{96, 96, kPi / 3};
    const SphereSpec sphere{{0, 0, -3}, 0.7};
    const MetricsReport rep = evaluate({pred}, {gt}, cam, sphere, 128, 13);
    CHECK(rep.aggregate.at("mirror").rmse >
          2.0 * rep.aggregate.at("diffuse").rmse);
}

TEST_CASE("report serialization carries every row") {
    AnalyticEnv scene;
    scene.ambient = {0.3, 0.3, 0.3};
    const HdriMap env = bake(scene, 64, 32);
    const CameraModel cam{48, 48, kPi / 3};
    const SphereSpec sphere{{0, 0, -3}, 0.7};
    const MetricsReport rep = evaluate({env, env}, {env, env}, cam, sphere, 8, 3);

    const std::string csv = metrics_csv(rep);
    CHECK(csv.find("frame,material,rmse,si_rmse,ssim,angular_error_deg") !=
          std::string::npos);
    CHECK(csv.find("mean,mirror") != std::string::npos);
    // 2 frames x 4 materials + 4 aggregate rows + header
    int lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == 13);

    const std::string json = metrics_json(rep);
    CHECK(json.find("\"aggregate\"") != std::string::npos);
    CHECK(json.find("\"matte\"") != std::string::npos);
}

}  // TEST_SUITE
