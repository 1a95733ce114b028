// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0
//
// probefuse: HDR environment recovery from mirror/diffuse sphere probes.
//
//   gen-maps   depth + camera + sphere -> conditioning map bundle
//   synth      scripted scene -> observation brackets + manifest + GT envs
//   fuse       manifest -> per-frame HDR envs + loss trace
//   render     env + geometry + material + ev -> sphere image
//   eval       predicted vs ground-truth env dirs -> metric report
//
// Exit codes: 0 success, 1 input error, 2 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "probefuse/color.hpp"
#include "probefuse/exr_io.hpp"
#include "probefuse/manifest.hpp"
#include "probefuse/metrics.hpp"
#include "probefuse/png_io.hpp"
#include "probefuse/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace probefuse;

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec3 json_vec3(const json &v, const std::string &where) {
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() ||
        !v[1].is_number() || !v[2].is_number())
        throw InputError(where + " must be [x, y, z]");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

json load_json(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    try {
        json doc;
        in >> doc;
        return doc;
    } catch (const json::exception &e) {
        throw InputError("'" + path + "': invalid JSON: " + e.what());
    }
}

AnalyticEnv parse_env(const json &doc) {
    AnalyticEnv env;
    if (doc.contains("ambient")) env.ambient = json_vec3(doc["ambient"], "ambient");
    if (doc.contains("gradient_top"))
        env.gradient_top = json_vec3(doc["gradient_top"], "gradient_top");
    if (doc.contains("gradient_bottom"))
        env.gradient_bottom =
            json_vec3(doc["gradient_bottom"], "gradient_bottom");
    if (doc.contains("lights")) {
        if (!doc["lights"].is_array())
            throw InputError("lights must be an array");
        for (const json &jl : doc["lights"]) {
            DiskLight light;
            light.direction =
                normalize(json_vec3(jl.at("direction"), "lights[].direction"));
            light.angular_radius =
                jl.at("angular_radius_deg").get<double>() * kPi / 180.0;
            light.radiance = json_vec3(jl.at("radiance"), "lights[].radiance");
            env.lights.push_back(light);
        }
    }
    return env;
}

AnalyticEnv default_env() {
    AnalyticEnv env;
    env.ambient = {0.05, 0.05, 0.05};
    env.lights.push_back(
        {normalize(Vec3{0.2, 0.4, 0.8}), 5.0 * kPi / 180.0, {1024, 1024, 1024}});
    return env;
}

std::vector<int> parse_ev_list(const std::string &evs) {
    std::vector<int> out;
    std::stringstream ss(evs);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stoi(item));
    if (out.empty()) throw InputError("--evs produced an empty set");
    return out;
}

std::string frame_name(const std::string &prefix, int index,
                       const std::string &suffix) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d", index);
    return prefix + buf + suffix;
}

// ---------------------------------------------------------------------------

struct GenMapsArgs {
    std::string depth_path, scene_path, rgb_path, out_dir;
};

int run_gen_maps(const GenMapsArgs &args) {
    const json scene = load_json(args.scene_path);
    if (!scene.contains("camera")) throw InputError("scene: camera is missing");
    if (!scene.contains("sphere")) throw InputError("scene: sphere is missing");
    CameraModel camera;
    camera.width = scene["camera"].at("width").get<int>();
    camera.height = scene["camera"].at("height").get<int>();
    camera.vertical_fov =
        scene["camera"].at("vertical_fov_deg").get<double>() * kPi / 180.0;
    validate(camera);
    SphereSpec sphere;
    sphere.center = json_vec3(scene["sphere"].at("center"), "sphere.center");
    sphere.radius = scene["sphere"].at("radius").get<double>();
    if (!(sphere.radius > 0)) throw InputError("sphere.radius must be > 0");

    const Image1 depth = read_exr_scalar(args.depth_path);
    Image3 rgb;
    if (!args.rgb_path.empty()) rgb = read_png(args.rgb_path);

    const ConditionMaps maps = condition_maps(camera, rgb, depth, sphere);

    fs::create_directories(args.out_dir);
    const fs::path out(args.out_dir);
    write_exr_rgb((out / "dir.exr").string(), maps.dir, ExrPrecision::float32);
    write_exr_rgb((out / "normals.exr").string(), maps.normals,
                  ExrPrecision::float32);
    write_exr_scalar((out / "dist.exr").string(), maps.dist);
    write_exr_scalar((out / "depth.exr").string(), maps.depth);
    write_png_gray((out / "sphere_mask.png").string(), maps.sphere_mask);
    write_png_gray((out / "dir_valid.png").string(), maps.dir_valid);
    write_png((out / "rgb_masked.png").string(), maps.rgb_masked);
    return 0;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string scenario = "dynamic_lighting";
    int frames = 1;
    std::string env_path, out_dir;
    int env_size = 512;
    int camera_size = 128;
    double vfov_deg = 60;
    double sphere_depth = 3.0;
    double radius_frac = 0.4;
    std::string evs = "0,-3,-6,-9,-12";
    std::string materials = "mirror,diffuse";
    double noise = 0.0;
    double azimuth_rate_deg = 10.0;
    double intensity_end = 1.0;
    int samples = 64;
    uint64_t seed = 0;
};

int run_synth(const SynthArgs &args) {
    AnalyticEnv env =
        args.env_path.empty() ? default_env() : parse_env(load_json(args.env_path));

    CameraModel camera{args.camera_size, args.camera_size,
                       args.vfov_deg * kPi / 180.0};
    validate(camera);

    SequenceScript script;
    script.frames = args.frames;
    script.scenario = scenario_from_string(args.scenario);
    script.azimuth_rate = args.azimuth_rate_deg * kPi / 180.0;
    script.intensity_end = args.intensity_end;
    const double radius = world_radius(args.sphere_depth, camera,
                                       args.radius_frac);
    script.sphere_start = {{0, 0, -args.sphere_depth}, radius};
    // default motion for the dynamic-sphere scenarios: push away and drift
    script.sphere_end = {{0.4 * radius, 0.2 * radius, -1.4 * args.sphere_depth},
                         1.4 * radius};

    std::vector<MaterialKind> mats;
    {
        std::stringstream ss(args.materials);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) mats.push_back(material_from_string(item));
    }

    const SynthResult result = gen_observations(
        env, script, camera, parse_ev_list(args.evs), mats, args.noise,
        args.seed, args.env_size, args.env_size / 2, args.samples);

    fs::create_directories(fs::path(args.out_dir) / "gt");
    ProbeManifest manifest;
    manifest.camera = camera;

    std::vector<ManifestFrame> frames(args.frames);
    for (int t = 0; t < args.frames; ++t) frames[t].index = t;
    for (const ProbeObservation &obs : result.observations) {
        char name[64];
        std::snprintf(name, sizeof(name), "obs_f%04d_%s_ev%d.exr", obs.frame,
                      to_string(obs.material).c_str(), obs.ev);
        write_exr_rgb((fs::path(args.out_dir) / name).string(), obs.image,
                      ExrPrecision::half);
        frames[obs.frame].observations.push_back(
            {name, obs.material, obs.ev, obs.sphere.center, obs.sphere.radius});
    }
    manifest.frames = std::move(frames);
    write_manifest(manifest, (fs::path(args.out_dir) / "manifest.json").string());

    for (int t = 0; t < args.frames; ++t)
        write_exr_rgb((fs::path(args.out_dir) / "gt" /
                       frame_name("env_", t, ".exr")).string(),
                      result.gt_envs[t], ExrPrecision::float32);
    return 0;
}

// ---------------------------------------------------------------------------

struct FuseArgs {
    std::string manifest_path, out_dir, config_path;
    // negative/zero sentinel means "not set on the command line"
    int iters = -1;
    double lr = -1, lambda = -1, tau = -1;
    int levels = -1, size = -1, samples = -1;
    int64_t seed = -1;
    bool no_sat_mask = false;
};

int run_fuse(const FuseArgs &args) {
    RunConfig run;
    if (!args.config_path.empty()) run = read_run_config(args.config_path);
    FusionConfig &cfg = run.fusion;
    if (args.iters > 0) cfg.iterations_per_frame = args.iters;
    if (args.lr > 0) cfg.learning_rate = args.lr;
    if (args.lambda >= 0) cfg.lambda = args.lambda;
    if (args.tau > 0) cfg.tau = args.tau;
    if (args.levels > 0) cfg.levels = args.levels;
    if (args.size > 0) {
        cfg.env_width = args.size;
        cfg.env_height = args.size / 2;
    }
    if (args.samples > 0) cfg.diffuse_samples = args.samples;
    if (args.seed >= 0) cfg.seed = static_cast<uint64_t>(args.seed);
    if (args.no_sat_mask) cfg.saturation_mask_enabled = false;

    const ProbeManifest manifest = read_manifest(args.manifest_path);
    const std::string base_dir =
        fs::path(args.manifest_path).parent_path().string();
    const std::vector<ProbeObservation> observations =
        load_observations(manifest, base_dir.empty() ? "." : base_dir);

    const FusionResult result = fuse(observations, cfg);

    const std::string out_dir =
        args.out_dir.empty() ? run.output_dir : args.out_dir;
    fs::create_directories(out_dir);
    for (size_t t = 0; t < result.envs.size(); ++t)
        write_exr_rgb((fs::path(out_dir) /
                       frame_name("env_", static_cast<int>(t), ".exr")).string(),
                      result.envs[t], ExrPrecision::float32);

    std::ofstream trace((fs::path(out_dir) / "loss.csv").string());
    trace << "iteration,loss\n";
    trace.precision(9);
    for (size_t i = 0; i < result.loss_trace.size(); ++i)
        trace << i << ',' << result.loss_trace[i] << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

struct RenderArgs {
    std::string env_path, material = "mirror", out_path;
    int ev = 0;
    int size = 128;
    double vfov_deg = 60;
    double sphere_depth = 3.0;
    double radius_frac = 0.4;
    int samples = 64;
    uint64_t seed = 0;
};

int run_render(const RenderArgs &args) {
    const HdriMap env = read_exr_rgb(args.env_path);
    if (env.width != 2 * env.height)
        throw InputError("env '" + args.env_path + "' is not 2:1 equirect");

    CameraModel camera{args.size, args.size, args.vfov_deg * kPi / 180.0};
    validate(camera);
    const SphereSpec sphere{{0, 0, -args.sphere_depth},
                            world_radius(args.sphere_depth, camera,
                                         args.radius_frac)};
    const SphereGeometry geom = sphere_normals(camera, sphere);

    Material material{material_from_string(args.material), 0};
    if (material.kind == MaterialKind::glossy) material = Material::glossy();
    if (material.kind == MaterialKind::matte) material = Material::matte();

    const SphereImage img =
        render_material(env, geom, material, args.samples, args.seed);
    const Image3 exposed = apply_exposure(img.pixels, args.ev);

    const std::string ext = fs::path(args.out_path).extension().string();
    if (ext == ".exr") {
        write_exr_rgb(args.out_path, exposed, ExrPrecision::half);
    } else if (ext == ".png") {
        write_png(args.out_path, srgb_encode(exposed));
    } else {
        throw InputError("--out must end in .png or .exr");
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string pred_dir, gt_dir, out_base;
    int size = 128;
    double vfov_deg = 60;
    double sphere_depth = 3.0;
    double radius_frac = 0.4;
    int samples = 64;
    uint64_t seed = 0;
};

std::vector<HdriMap> load_env_dir(const std::string &dir) {
    std::vector<std::string> paths;
    if (!fs::is_directory(dir))
        throw InputError("'" + dir + "' is not a directory");
    for (const auto &entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".exr")
            paths.push_back(entry.path().string());
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw InputError("no .exr files in '" + dir + "'");
    std::vector<HdriMap> envs;
    envs.reserve(paths.size());
    for (const std::string &p : paths) envs.push_back(read_exr_rgb(p));
    return envs;
}

int run_eval(const EvalArgs &args) {
    const std::vector<HdriMap> pred = load_env_dir(args.pred_dir);
    const std::vector<HdriMap> gt = load_env_dir(args.gt_dir);
    if (pred.size() != gt.size())
        throw InputError("pred and gt frame counts differ (" +
                         std::to_string(pred.size()) + " vs " +
                         std::to_string(gt.size()) + ")");

    CameraModel camera{args.size, args.size, args.vfov_deg * kPi / 180.0};
    validate(camera);
    const SphereSpec sphere{{0, 0, -args.sphere_depth},
                            world_radius(args.sphere_depth, camera,
                                         args.radius_frac)};

    const MetricsReport report =
        evaluate(pred, gt, camera, sphere, args.samples, args.seed);

    std::ofstream csv(args.out_base + ".csv");
    if (!csv) throw InputError("cannot write '" + args.out_base + ".csv'");
    csv << metrics_csv(report);
    std::ofstream jsonf(args.out_base + ".json");
    jsonf << metrics_json(report) << '\n';

    std::cout << metrics_csv(report);
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"HDR environment-map recovery from sphere light probes"};
    app.require_subcommand(1);

    GenMapsArgs gen;
    CLI::App *gen_cmd =
        app.add_subcommand("gen-maps", "compute the conditioning map bundle");
    gen_cmd->add_option("--depth", gen.depth_path, "scene depth EXR")->required();
    gen_cmd->add_option("--scene", gen.scene_path,
                        "JSON with camera and sphere")->required();
    gen_cmd->add_option("--rgb", gen.rgb_path, "background PNG (optional)");
    gen_cmd->add_option("--out", gen.out_dir, "output directory")->required();

    SynthArgs synth;
    CLI::App *synth_cmd =
        app.add_subcommand("synth", "generate synthetic probe observations");
    synth_cmd->add_option("--scenario", synth.scenario,
                          "dynamic_sphere|dynamic_camera|dynamic_lighting|combination");
    synth_cmd->add_option("--frames", synth.frames, "frame count");
    synth_cmd->add_option("--env", synth.env_path, "analytic env JSON");
    synth_cmd->add_option("--out", synth.out_dir, "output directory")->required();
    synth_cmd->add_option("--size", synth.env_size, "env width (2:1)");
    synth_cmd->add_option("--camera-size", synth.camera_size, "probe image size");
    synth_cmd->add_option("--vfov", synth.vfov_deg, "vertical fov, degrees");
    synth_cmd->add_option("--sphere-depth", synth.sphere_depth, "sphere depth");
    synth_cmd->add_option("--radius-frac", synth.radius_frac,
                          "image-space radius fraction");
    synth_cmd->add_option("--evs", synth.evs, "comma-separated EV list");
    synth_cmd->add_option("--materials", synth.materials,
                          "comma-separated material list");
    synth_cmd->add_option("--noise", synth.noise, "sRGB noise sigma");
    synth_cmd->add_option("--azimuth-rate", synth.azimuth_rate_deg,
                          "degrees per frame");
    synth_cmd->add_option("--intensity-end", synth.intensity_end,
                          "light intensity scale at the last frame");
    synth_cmd->add_option("--samples", synth.samples, "diffuse sample count");
    synth_cmd->add_option("--seed", synth.seed, "rng seed");

    FuseArgs fuse_args;
    CLI::App *fuse_cmd =
        app.add_subcommand("fuse", "recover HDR envs from a probe manifest");
    fuse_cmd->add_option("--manifest", fuse_args.manifest_path,
                         "probe manifest JSON")->required();
    fuse_cmd->add_option("--out", fuse_args.out_dir, "output directory");
    fuse_cmd->add_option("--config", fuse_args.config_path, "run config JSON");
    fuse_cmd->add_option("--iters", fuse_args.iters, "iterations per frame");
    fuse_cmd->add_option("--lr", fuse_args.lr, "Adam learning rate");
    fuse_cmd->add_option("--lambda", fuse_args.lambda, "temporal weight");
    fuse_cmd->add_option("--tau", fuse_args.tau, "saturation threshold");
    fuse_cmd->add_option("--levels", fuse_args.levels, "pyramid levels");
    fuse_cmd->add_option("--size", fuse_args.size, "env width (2:1)");
    fuse_cmd->add_option("--samples", fuse_args.samples, "diffuse samples");
    fuse_cmd->add_option("--seed", fuse_args.seed, "rng seed");
    fuse_cmd->add_flag("--no-sat-mask", fuse_args.no_sat_mask,
                       "disable the saturation mask");

    RenderArgs render;
    CLI::App *render_cmd =
        app.add_subcommand("render", "render a probe sphere under an env");
    render_cmd->add_option("--env", render.env_path, "environment EXR")
        ->required();
    render_cmd->add_option("--material", render.material,
                           "mirror|diffuse|glossy|matte");
    render_cmd->add_option("--ev", render.ev, "exposure value (stops)");
    render_cmd->add_option("--out", render.out_path, "output .png or .exr")
        ->required();
    render_cmd->add_option("--size", render.size, "image size");
    render_cmd->add_option("--vfov", render.vfov_deg, "vertical fov, degrees");
    render_cmd->add_option("--sphere-depth", render.sphere_depth, "sphere depth");
    render_cmd->add_option("--radius-frac", render.radius_frac,
                           "image-space radius fraction");
    render_cmd->add_option("--samples", render.samples, "sample count");
    render_cmd->add_option("--seed", render.seed, "rng seed");

    EvalArgs eval_args;
    CLI::App *eval_cmd =
        app.add_subcommand("eval", "score predicted envs against ground truth");
    eval_cmd->add_option("--pred", eval_args.pred_dir, "predicted env dir")
        ->required();
    eval_cmd->add_option("--gt", eval_args.gt_dir, "ground truth env dir")
        ->required();
    eval_cmd->add_option("--out", eval_args.out_base,
                         "report base path (.csv/.json added)")->required();
    eval_cmd->add_option("--size", eval_args.size, "render size");
    eval_cmd->add_option("--vfov", eval_args.vfov_deg, "vertical fov, degrees");
    eval_cmd->add_option("--sphere-depth", eval_args.sphere_depth,
                         "sphere depth");
    eval_cmd->add_option("--radius-frac", eval_args.radius_frac,
                         "image-space radius fraction");
    eval_cmd->add_option("--samples", eval_args.samples, "sample count");
    eval_cmd->add_option("--seed", eval_args.seed, "rng seed");

    try {
        app.parse(argc, argv);
        if (gen_cmd->parsed()) return run_gen_maps(gen);
        if (synth_cmd->parsed()) return run_synth(synth);
        if (fuse_cmd->parsed()) return run_fuse(fuse_args);
        if (render_cmd->parsed()) return run_render(render);
        if (eval_cmd->parsed()) return run_eval(eval_args);
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const NumericalError &e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const InputError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
