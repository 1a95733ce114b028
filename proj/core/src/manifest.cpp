// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#include "probefuse/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <tuple>

#include <json.hpp>

#include "probefuse/exr_io.hpp"

namespace probefuse {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void bad_field(const std::string &field, const std::string &why) {
    throw InputError("manifest: " + field + " " + why);
}

const json &require(const json &obj, const std::string &key,
                    const std::string &where) {
    auto it = obj.find(key);
    if (it == obj.end()) bad_field(where + "." + key, "is missing");
    return *it;
}

double require_number(const json &obj, const std::string &key,
                      const std::string &where) {
    const json &v = require(obj, key, where);
    if (!v.is_number()) bad_field(where + "." + key, "must be a number");
    return v.get<double>();
}

std::string require_string(const json &obj, const std::string &key,
                           const std::string &where) {
    const json &v = require(obj, key, where);
    if (!v.is_string()) bad_field(where + "." + key, "must be a string");
    return v.get<std::string>();
}

}  // namespace

ProbeManifest read_manifest(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw InputError("manifest: cannot open '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception &e) {
        throw InputError("manifest '" + path + "': invalid JSON: " + e.what());
    }

    ProbeManifest m;
    const json &version = require(doc, "version", "manifest");
    if (!version.is_number_integer() || version.get<int>() != 1)
        bad_field("manifest.version", "must be the integer 1");
    m.version = 1;

    const json &camera = require(doc, "camera", "manifest");
    m.camera.width =
        static_cast<int>(require_number(camera, "width", "camera"));
    m.camera.height =
        static_cast<int>(require_number(camera, "height", "camera"));
    const double fov_deg = require_number(camera, "vertical_fov_deg", "camera");
    if (m.camera.width < 1 || m.camera.height < 1)
        bad_field("camera.width/height", "must be positive");
    if (!(fov_deg > 0) || !(fov_deg < 180))
        bad_field("camera.vertical_fov_deg", "must be in (0, 180)");
    m.camera.vertical_fov = fov_deg * kPi / 180.0;

    const json &frames = require(doc, "frames", "manifest");
    if (!frames.is_array() || frames.empty())
        bad_field("manifest.frames", "must be a non-empty array");

    std::set<std::tuple<int, int, int>> seen;  // (frame, material, ev)
    for (size_t fi = 0; fi < frames.size(); ++fi) {
        const std::string fwhere = "frames[" + std::to_string(fi) + "]";
        const json &frame = frames[fi];
        ManifestFrame mf;
        mf.index = static_cast<int>(require_number(frame, "index", fwhere));
        if (mf.index < 0) bad_field(fwhere + ".index", "must be >= 0");
        const json &observations = require(frame, "observations", fwhere);
        if (!observations.is_array() || observations.empty())
            bad_field(fwhere + ".observations", "must be a non-empty array");
        for (size_t oi = 0; oi < observations.size(); ++oi) {
            const std::string owhere =
                fwhere + ".observations[" + std::to_string(oi) + "]";
            const json &obs = observations[oi];
            ManifestObservation mo;
            mo.image_path = require_string(obs, "image_path", owhere);
            mo.material =
                material_from_string(require_string(obs, "material", owhere));
            if (mo.material != MaterialKind::mirror &&
                mo.material != MaterialKind::diffuse)
                bad_field(owhere + ".material", "must be mirror or diffuse");
            const json &ev = require(obs, "ev", owhere);
            if (!ev.is_number_integer())
                bad_field(owhere + ".ev", "must be an integer");
            mo.ev = ev.get<int>();
            const json &center = require(obs, "sphere_center", owhere);
            if (!center.is_array() || center.size() != 3 ||
                !center[0].is_number() || !center[1].is_number() ||
                !center[2].is_number())
                bad_field(owhere + ".sphere_center", "must be [x, y, z]");
            mo.sphere_center = {center[0].get<double>(),
                                center[1].get<double>(),
                                center[2].get<double>()};
            mo.sphere_radius = require_number(obs, "sphere_radius", owhere);
            if (!(mo.sphere_radius > 0))
                bad_field(owhere + ".sphere_radius", "must be > 0");
            if (!seen.insert({mf.index, static_cast<int>(mo.material), mo.ev})
                     .second)
                bad_field(owhere, "duplicates a (frame, material, ev) triple");
            mf.observations.push_back(std::move(mo));
        }
        m.frames.push_back(std::move(mf));
    }
    return m;
}

void write_manifest(const ProbeManifest &manifest, const std::string &path) {
    json doc;
    doc["version"] = manifest.version;
    doc["camera"] = {{"width", manifest.camera.width},
                     {"height", manifest.camera.height},
                     {"vertical_fov_deg",
                      manifest.camera.vertical_fov * 180.0 / kPi}};
    doc["frames"] = json::array();
    for (const ManifestFrame &frame : manifest.frames) {
        json jframe;
        jframe["index"] = frame.index;
        jframe["observations"] = json::array();
        for (const ManifestObservation &obs : frame.observations) {
            jframe["observations"].push_back(
                {{"image_path", obs.image_path},
                 {"material", to_string(obs.material)},
                 {"ev", obs.ev},
                 {"sphere_center",
                  {obs.sphere_center.x, obs.sphere_center.y,
                   obs.sphere_center.z}},
                 {"sphere_radius", obs.sphere_radius}});
        }
        doc["frames"].push_back(std::move(jframe));
    }
    std::ofstream out(path);
    if (!out) throw InputError("manifest: cannot write '" + path + "'");
    out << doc.dump(2) << '\n';
}

std::vector<ProbeObservation> load_observations(const ProbeManifest &manifest,
                                                const std::string &base_dir) {
    validate(manifest.camera);
    std::vector<ProbeObservation> out;
    for (const ManifestFrame &frame : manifest.frames) {
        for (const ManifestObservation &mo : frame.observations) {
            const fs::path path = fs::path(base_dir) / mo.image_path;
            if (!fs::exists(path))
                throw InputError("manifest: image_path '" + path.string() +
                                 "' does not exist");
            ProbeObservation obs;
            obs.image = read_exr_rgb(path.string());
            if (obs.image.width != manifest.camera.width ||
                obs.image.height != manifest.camera.height)
                throw InputError("manifest: image '" + path.string() +
                                 "' does not match the camera size");
            obs.material = mo.material;
            obs.ev = mo.ev;
            obs.frame = frame.index;
            obs.sphere = {mo.sphere_center, mo.sphere_radius};
            obs.camera = manifest.camera;
            obs.geometry = sphere_normals(manifest.camera, obs.sphere);
            obs.image_path = path.string();
            out.push_back(std::move(obs));
        }
    }
    return out;
}

RunConfig read_run_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw InputError("run config: cannot open '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception &e) {
        throw InputError("run config '" + path + "': invalid JSON: " +
                         e.what());
    }
    RunConfig cfg;
    auto number = [&doc](const char *key, double fallback) {
        auto it = doc.find(key);
        if (it == doc.end()) return fallback;
        if (!it->is_number())
            bad_field(std::string("run_config.") + key, "must be a number");
        return it->get<double>();
    };
    cfg.fusion.iterations_per_frame = static_cast<int>(
        number("iterations_per_frame", cfg.fusion.iterations_per_frame));
    cfg.fusion.learning_rate =
        number("learning_rate", cfg.fusion.learning_rate);
    cfg.fusion.lambda = number("lambda", cfg.fusion.lambda);
    cfg.fusion.tau = number("tau", cfg.fusion.tau);
    cfg.fusion.levels = static_cast<int>(number("levels", cfg.fusion.levels));
    cfg.fusion.env_width =
        static_cast<int>(number("env_width", cfg.fusion.env_width));
    cfg.fusion.env_height =
        static_cast<int>(number("env_height", cfg.fusion.env_height));
    cfg.fusion.diffuse_samples = static_cast<int>(
        number("diffuse_samples", cfg.fusion.diffuse_samples));
    cfg.fusion.seed = static_cast<uint64_t>(
        number("seed", static_cast<double>(cfg.fusion.seed)));
    if (auto it = doc.find("saturation_mask"); it != doc.end()) {
        if (!it->is_boolean())
            bad_field("run_config.saturation_mask", "must be a boolean");
        cfg.fusion.saturation_mask_enabled = it->get<bool>();
    }
    if (auto it = doc.find("output_dir"); it != doc.end()) {
        if (!it->is_string())
            bad_field("run_config.output_dir", "must be a string");
        cfg.output_dir = it->get<std::string>();
    }
    return cfg;
}

}  // namespace probefuse
