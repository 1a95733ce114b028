// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#include "probefuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "probefuse/color.hpp"
#include "probefuse/rng.hpp"

namespace probefuse {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_sizes(const Image3 &a, const Image3 &b, const Image1 &mask,
                 const char *who) {
    if (!a.same_size(b) || a.width != mask.width || a.height != mask.height)
        throw InputError(std::string(who) + ": image sizes differ");
}

}  // namespace

double rmse(const Image3 &a, const Image3 &b, const Image1 &mask) {
    check_sizes(a, b, mask, "rmse");
    double acc = 0;
    int64_t count = 0;
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x) {
            if (mask.at(x, y) <= 0) continue;
            for (int c = 0; c < 3; ++c) {
                const double d = a.at(x, y, c) - b.at(x, y, c);
                acc += d * d;
            }
            count += 3;
        }
    if (count == 0) throw InputError("rmse: empty mask");
    return std::sqrt(acc / count);
}

double si_scale(const Image3 &pred_linear, const Image3 &gt_linear,
                const Image1 &mask) {
    check_sizes(pred_linear, gt_linear, mask, "si_rmse");
    double pp = 0, pg = 0;
    for (int y = 0; y < pred_linear.height; ++y)
        for (int x = 0; x < pred_linear.width; ++x) {
            if (mask.at(x, y) <= 0) continue;
            for (int c = 0; c < 3; ++c) {
                const double p = pred_linear.at(x, y, c);
                pp += p * p;
                pg += p * gt_linear.at(x, y, c);
            }
        }
    return pp > 0 ? pg / pp : 0.0;
}

double si_rmse(const Image3 &pred_linear, const Image3 &gt_linear,
               const Image1 &mask) {
    const double alpha = si_scale(pred_linear, gt_linear, mask);
    Image3 aligned = pred_linear;
    for (double &v : aligned.data) v *= alpha;
    return rmse(srgb_encode(aligned), srgb_encode(gt_linear), mask);
}

double ssim(const Image3 &a, const Image3 &b, const Image1 &mask) {
    check_sizes(a, b, mask, "ssim");
    constexpr int kRadius = 5;  // 11x11 window
    if (a.width < 2 * kRadius + 1 || a.height < 2 * kRadius + 1)
        throw InputError("ssim: images must be at least 11x11");

    // 11-tap Gaussian, sigma 1.5
    double kernel[2 * kRadius + 1];
    double ksum = 0;
    for (int i = -kRadius; i <= kRadius; ++i) {
        kernel[i + kRadius] = std::exp(-(i * i) / (2.0 * 1.5 * 1.5));
        ksum += kernel[i + kRadius];
    }
    for (double &k : kernel) k /= ksum;

    constexpr double c1 = 0.01 * 0.01;  // (K1*L)^2, L = 1
    constexpr double c2 = 0.03 * 0.03;

    double acc = 0;
    int64_t count = 0;
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x) {
            if (mask.at(x, y) <= 0) continue;
            for (int c = 0; c < 3; ++c) {
                double mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
                for (int dy = -kRadius; dy <= kRadius; ++dy) {
                    const int sy = std::clamp(y + dy, 0, a.height - 1);
                    for (int dx = -kRadius; dx <= kRadius; ++dx) {
                        const int sx = std::clamp(x + dx, 0, a.width - 1);
                        const double w =
                            kernel[dy + kRadius] * kernel[dx + kRadius];
                        const double va = a.at(sx, sy, c);
                        const double vb = b.at(sx, sy, c);
                        mu_a += w * va;
                        mu_b += w * vb;
                        aa += w * va * va;
                        bb += w * vb * vb;
                        ab += w * va * vb;
                    }
                }
                const double var_a = aa - mu_a * mu_a;
                const double var_b = bb - mu_b * mu_b;
                const double cov = ab - mu_a * mu_b;
                acc += (2 * mu_a * mu_b + c1) * (2 * cov + c2) /
                       ((mu_a * mu_a + mu_b * mu_b + c1) *
                        (var_a + var_b + c2));
                ++count;
            }
        }
    if (count == 0) throw InputError("ssim: empty mask");
    return acc / count;
}

double angular_error_deg(const Image3 &a, const Image3 &b,
                         const Image1 &mask) {
    check_sizes(a, b, mask, "angular_error");
    double acc = 0;
    int64_t count = 0;
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x) {
            if (mask.at(x, y) <= 0) continue;
            const Vec3 va = a.get(x, y);
            const Vec3 vb = b.get(x, y);
            if (norm(va) <= 0 || norm(vb) <= 0) continue;  // skipped
            // atan2 form: exact 0 for identical and 90 for orthogonal pixels
            acc += std::atan2(norm(cross(va, vb)), dot(va, vb)) * (180.0 / kPi);
            ++count;
        }
    if (count == 0)
        throw InputError("angular_error: no nonzero pixels in mask");
    return acc / count;
}

Vec3 dominant_direction(const HdriMap &env) {
    const Image1 domega = solid_angle_map(env.width, env.height);
    Vec3 acc{0, 0, 0};
    for (int y = 0; y < env.height; ++y) {
        const double v = (y + 0.5) / env.height;
        for (int x = 0; x < env.width; ++x) {
            const double u = (x + 0.5) / env.width;
            acc += pixel_to_dir(u, v) *
                   (luminance(env.get(x, y)) * domega.at(x, y));
        }
    }
    return normalize(acc);
}

MetricsReport evaluate(const std::vector<HdriMap> &pred,
                       const std::vector<HdriMap> &gt,
                       const CameraModel &camera, const SphereSpec &sphere,
                       int samples, uint64_t seed) {
    if (pred.size() != gt.size())
        throw InputError("evaluate: frame counts differ");
    if (pred.empty()) throw InputError("evaluate: no frames");

    const SphereGeometry geom = sphere_normals(camera, sphere);
    const Material materials[4] = {Material::mirror(), Material::diffuse(),
                                   Material::glossy(), Material::matte()};

    MetricsReport report;
    report.frames.resize(pred.size());
    for (size_t t = 0; t < pred.size(); ++t) {
        if (!pred[t].same_size(gt[t]))
            throw InputError("evaluate: env sizes differ at frame " +
                             std::to_string(t));
        // One sample set per material, importance-sampled from the mixture
        // of both envs and applied to each: the pdf covers either side's
        // light and the Monte Carlo noise cancels in the difference.
        HdriMap mix = pred[t];
        for (size_t i = 0; i < mix.data.size(); ++i)
            mix.data[i] = 0.5 * (mix.data[i] + gt[t].data[i]);
        for (const Material &mat : materials) {
            const uint64_t s = mix_seed(seed, t * 7 +
                                                  static_cast<uint64_t>(mat.kind));
            const RenderTaps taps = build_taps(mix, geom, mat, samples, s);
            const Image3 rp = taps.apply(pred[t]);
            const Image3 rg = taps.apply(gt[t]);

            const Image3 ep = srgb_encode(rp);
            const Image3 eg = srgb_encode(rg);

            MaterialMetrics m;
            m.rmse = rmse(ep, eg, geom.mask);
            m.si_rmse = si_rmse(rp, rg, geom.mask);
            m.ssim = ssim(ep, eg, geom.mask);
            m.angular_error_deg = angular_error_deg(ep, eg, geom.mask);
            report.frames[t][to_string(mat.kind)] = m;
        }
    }
    for (const Material &mat : materials) {
        const std::string key = to_string(mat.kind);
        MaterialMetrics mean;
        for (const auto &frame : report.frames) {
            const MaterialMetrics &m = frame.at(key);
            mean.rmse += m.rmse;
            mean.si_rmse += m.si_rmse;
            mean.ssim += m.ssim;
            mean.angular_error_deg += m.angular_error_deg;
        }
        const double n = static_cast<double>(report.frames.size());
        mean.rmse /= n;
        mean.si_rmse /= n;
        mean.ssim /= n;
        mean.angular_error_deg /= n;
        report.aggregate[key] = mean;
    }
    return report;
}

std::string metrics_csv(const MetricsReport &report) {
    std::ostringstream out;
    out << "frame,material,rmse,si_rmse,ssim,angular_error_deg\n";
    out.precision(6);
    for (size_t t = 0; t < report.frames.size(); ++t)
        for (const auto &[material, m] : report.frames[t])
            out << t << ',' << material << ',' << m.rmse << ',' << m.si_rmse
                << ',' << m.ssim << ',' << m.angular_error_deg << '\n';
    for (const auto &[material, m] : report.aggregate)
        out << "mean," << material << ',' << m.rmse << ',' << m.si_rmse << ','
            << m.ssim << ',' << m.angular_error_deg << '\n';
    return out.str();
}

std::string metrics_json(const MetricsReport &report) {
    std::ostringstream out;
    out.precision(10);
    auto row = [&out](const MaterialMetrics &m) {
        out << "{\"rmse\":" << m.rmse << ",\"si_rmse\":" << m.si_rmse
            << ",\"ssim\":" << m.ssim << ",\"angular_error_deg\":"
            << m.angular_error_deg << "}";
    };
    out << "{\"frames\":[";
    for (size_t t = 0; t < report.frames.size(); ++t) {
        if (t) out << ',';
        out << '{';
        bool first = true;
        for (const auto &[material, m] : report.frames[t]) {
            if (!first) out << ',';
            first = false;
            out << '"' << material << "\":";
            row(m);
        }
        out << '}';
    }
    out << "],\"aggregate\":{";
    bool first = true;
    for (const auto &[material, m] : report.aggregate) {
        if (!first) out << ',';
        first = false;
        out << '"' << material << "\":";
        row(m);
    }
    out << "}}";
    return out.str();
}

}  // namespace probefuse
