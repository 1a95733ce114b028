// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#include "probefuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "probefuse/color.hpp"
#include "probefuse/rng.hpp"

namespace probefuse {

namespace {

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

void validate_config(const FusionConfig &c) {
    if (c.iterations_per_frame < 1)
        throw InputError("fusion config: iterations_per_frame must be >= 1");
    if (!(c.learning_rate > 0))
        throw InputError("fusion config: learning_rate must be > 0");
    if (!(c.lambda >= 0)) throw InputError("fusion config: lambda must be >= 0");
    if (!(c.tau > 0) || !(c.tau < 1))
        throw InputError("fusion config: tau must be in (0, 1)");
    if (c.levels < 1) throw InputError("fusion config: levels must be >= 1");
    if (c.env_width != 2 * c.env_height || c.env_height < 2)
        throw InputError("fusion config: env size must be 2H x H");
    if (c.diffuse_samples < 1)
        throw InputError("fusion config: diffuse_samples must be >= 1");
}

// env may be null for mirror observations (only its dimensions matter).
RenderTaps observation_taps(const HdriMap *env, const ProbeObservation &obs,
                            const FusionConfig &config, uint64_t seed) {
    if (obs.material == MaterialKind::mirror)
        return mirror_taps(config.env_width, config.env_height, obs.geometry);
    if (obs.material == MaterialKind::diffuse)
        return diffuse_taps(*env, obs.geometry, config.diffuse_samples, seed);
    throw InputError("fuse: observations must be mirror or diffuse");
}

}  // namespace

Image3 saturation_mask(const Image3 &pred, const Image3 &obs, double tau) {
    if (!pred.same_size(obs))
        throw InputError("saturation_mask: image sizes differ");
    Image3 mask(pred.width, pred.height);
    for (size_t i = 0; i < mask.data.size(); ++i)
        mask.data[i] = (pred.data[i] > tau && obs.data[i] > tau) ? 0.0 : 1.0;
    return mask;
}

LossStep loss_step_with_taps(const std::vector<LaplacianPyramid> &pyramids,
                             const ProbeObservation &obs,
                             const FusionConfig &config,
                             const RenderTaps &taps_t,
                             const RenderTaps *taps_prev,
                             const RenderTaps *taps_next) {
    const int t = obs.frame;
    if (t < 0 || t >= static_cast<int>(pyramids.size()))
        throw InputError("loss_step: observation frame out of range");
    if (obs.image.width != obs.geometry.width ||
        obs.image.height != obs.geometry.height)
        throw InputError("loss_step: observation image does not match geometry");

    RenderChain chain_t = forward_chain(pyramids[t], taps_t, obs.ev);
    if (!all_finite(chain_t.srgb))
        throw NumericalError("loss_step: non-finite forward pass (frame " +
                             std::to_string(t) + ")");

    struct Neighbor {
        int frame;
        const RenderTaps *taps;
        RenderChain chain;
    };
    std::vector<Neighbor> neighbors;
    if (config.lambda > 0) {
        if (taps_prev && t - 1 >= 0) {
            neighbors.push_back({t - 1, taps_prev,
                                 forward_chain(pyramids[t - 1], *taps_prev,
                                               obs.ev)});
        }
        if (taps_next && t + 1 < static_cast<int>(pyramids.size())) {
            neighbors.push_back({t + 1, taps_next,
                                 forward_chain(pyramids[t + 1], *taps_next,
                                               obs.ev)});
        }
        for (const Neighbor &n : neighbors)
            if (!all_finite(n.chain.srgb))
                throw NumericalError(
                    "loss_step: non-finite forward pass (frame " +
                    std::to_string(n.frame) + ")");
    }

    // combined mask: sphere footprint, and (optionally) saturation
    const int w = obs.image.width, h = obs.image.height;
    Image3 mask(w, h);
    double mask_sum = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (obs.geometry.mask.at(x, y) <= 0) continue;
            for (int c = 0; c < 3; ++c) {
                double m = 1.0;
                if (config.saturation_mask_enabled &&
                    chain_t.srgb.at(x, y, c) > config.tau &&
                    obs.image.at(x, y, c) > config.tau)
                    m = 0.0;
                mask.at(x, y, c) = m;
                mask_sum += m;
            }
        }

    LossStep step;
    if (mask_sum <= 0) return step;  // everything saturated: no constraint

    const double half_lambda = 0.5 * config.lambda;
    Image3 adj_t(w, h);
    std::vector<Image3> adj_n(neighbors.size(), Image3(w, h));

    double data_acc = 0, temporal_acc = 0;
    for (size_t i = 0; i < mask.data.size(); ++i) {
        const double m = mask.data[i];
        if (m <= 0) continue;
        const double d = chain_t.srgb.data[i] - obs.image.data[i];
        data_acc += m * d * d;
        double adj = 2.0 * d;
        for (size_t k = 0; k < neighbors.size(); ++k) {
            const double r =
                chain_t.srgb.data[i] - neighbors[k].chain.srgb.data[i];
            temporal_acc += m * half_lambda * std::abs(r);
            adj += half_lambda * sign(r);
            adj_n[k].data[i] = -m * half_lambda * sign(r) / mask_sum;
        }
        adj_t.data[i] = m * adj / mask_sum;
    }

    step.data_term = data_acc / mask_sum;
    step.temporal_term = temporal_acc / mask_sum;
    step.loss = step.data_term + step.temporal_term;

    step.grads.emplace_back(
        t, backward_chain(chain_t, pyramids[t], taps_t, obs.ev, adj_t));
    for (size_t k = 0; k < neighbors.size(); ++k) {
        const Neighbor &n = neighbors[k];
        step.grads.emplace_back(
            n.frame, backward_chain(n.chain, pyramids[n.frame], *n.taps,
                                    obs.ev, adj_n[k]));
    }
    return step;
}

LossStep loss_step(const std::vector<LaplacianPyramid> &pyramids,
                   const ProbeObservation &obs, const FusionConfig &config,
                   uint64_t taps_seed) {
    const int t = obs.frame;
    if (t < 0 || t >= static_cast<int>(pyramids.size()))
        throw InputError("loss_step: observation frame out of range");

    const bool needs_env = obs.material == MaterialKind::diffuse;
    HdriMap env_t;
    if (needs_env) env_t = pyramid_compose(pyramids[t]);
    const RenderTaps taps_t = observation_taps(needs_env ? &env_t : nullptr,
                                               obs, config,
                                               mix_seed(taps_seed, 0));

    RenderTaps taps_prev, taps_next;
    const RenderTaps *prev = nullptr, *next = nullptr;
    if (config.lambda > 0 && t - 1 >= 0) {
        HdriMap env_prev;
        if (needs_env) env_prev = pyramid_compose(pyramids[t - 1]);
        taps_prev = observation_taps(needs_env ? &env_prev : nullptr, obs,
                                     config, mix_seed(taps_seed, 1));
        prev = &taps_prev;
    }
    if (config.lambda > 0 && t + 1 < static_cast<int>(pyramids.size())) {
        HdriMap env_next;
        if (needs_env) env_next = pyramid_compose(pyramids[t + 1]);
        taps_next = observation_taps(needs_env ? &env_next : nullptr, obs,
                                     config, mix_seed(taps_seed, 2));
        next = &taps_next;
    }
    return loss_step_with_taps(pyramids, obs, config, taps_t, prev, next);
}

FusionResult fuse(const std::vector<ProbeObservation> &observations,
                  const FusionConfig &config) {
    validate_config(config);
    if (observations.empty()) throw InputError("fuse: no observations");

    int frames = 0;
    for (const ProbeObservation &o : observations) {
        if (o.frame < 0) throw InputError("fuse: negative frame index");
        frames = std::max(frames, o.frame + 1);
        if (o.image.width != o.geometry.width ||
            o.image.height != o.geometry.height)
            throw InputError("fuse: observation image does not match geometry");
    }
    std::vector<char> covered(frames, 0);
    for (const ProbeObservation &o : observations) covered[o.frame] = 1;
    for (int f = 0; f < frames; ++f)
        if (!covered[f])
            throw InputError("fuse: frame " + std::to_string(f) +
                             " has no observations");

    // constant gray 0.5 init: coarsest log2 level at -1
    std::vector<LaplacianPyramid> pyramids(
        frames, make_constant_pyramid(config.env_width, config.env_height,
                                      config.levels, -1.0));
    std::vector<LaplacianPyramid> mom1(
        frames, make_constant_pyramid(config.env_width, config.env_height,
                                      config.levels, 0.0));
    std::vector<LaplacianPyramid> mom2 = mom1;

    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    double beta1_t = 1.0, beta2_t = 1.0;

    const int64_t total_steps =
        static_cast<int64_t>(config.iterations_per_frame) * frames;
    FusionResult result;
    result.config = config;
    result.loss_trace.reserve(total_steps);

    Rng pick(mix_seed(config.seed, 0x9bde));
    for (int64_t it = 0; it < total_steps; ++it) {
        const ProbeObservation &obs =
            observations[pick.next_below(observations.size())];
        LossStep step = loss_step(pyramids, obs, config,
                                  mix_seed(config.seed, 0x70000000ULL + it));
        if (!std::isfinite(step.loss))
            throw NumericalError("fuse: non-finite loss at iteration " +
                                 std::to_string(it));
        if (step.loss > 1e6)
            throw NumericalError("fuse: diverged at iteration " +
                                 std::to_string(it) +
                                 " (loss = " + std::to_string(step.loss) + ")");
        result.loss_trace.push_back(step.loss);

        beta1_t *= beta1;
        beta2_t *= beta2;
        const double corr1 = 1.0 / (1.0 - beta1_t);
        const double corr2 = 1.0 / (1.0 - beta2_t);
        for (int f = 0; f < frames; ++f) {
            const LaplacianPyramid *grad = nullptr;
            for (const auto &[gf, g] : step.grads)
                if (gf == f) grad = &g;
            for (int l = 0; l < config.levels; ++l) {
                double *p = pyramids[f].levels[l].data.data();
                double *m = mom1[f].levels[l].data.data();
                double *v = mom2[f].levels[l].data.data();
                const double *g =
                    grad ? grad->levels[l].data.data() : nullptr;
                const size_t n = pyramids[f].levels[l].data.size();
                for (size_t i = 0; i < n; ++i) {
                    const double gi = g ? g[i] : 0.0;
                    m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
                    v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
                    p[i] -= config.learning_rate * (m[i] * corr1) /
                            (std::sqrt(v[i] * corr2) + eps);
                }
            }
        }
    }

    result.envs.reserve(frames);
    for (int f = 0; f < frames; ++f)
        result.envs.push_back(pyramid_compose(pyramids[f]));
    return result;
}

}  // namespace probefuse
