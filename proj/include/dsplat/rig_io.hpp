#pragma once

#include <json.hpp>

#include "dsplat/camera.hpp"
#include "dsplat/hash.hpp"
#include "dsplat/io_util.hpp"

namespace dsplat {

// Camera rigs as JSON with full round-trip double precision (nlohmann emits
// shortest-exact doubles). The rig hash pins "all nodes use identical
// settings": workers recompute it and the coordinator compares.

inline nlohmann::json camera_to_json(const Camera& cam) {
    nlohmann::json j;
    j["position"] = {cam.position.x, cam.position.y, cam.position.z};
    j["target"] = {cam.target.x, cam.target.y, cam.target.z};
    j["up"] = {cam.up.x, cam.up.y, cam.up.z};
    j["fov_y"] = cam.fov_y;
    j["width"] = cam.width;
    j["height"] = cam.height;
    j["near"] = cam.near;
    j["far"] = cam.far;
    return j;
}

inline Camera camera_from_json(const nlohmann::json& j) {
    Camera cam;
    cam.position = {j.at("position").at(0), j.at("position").at(1), j.at("position").at(2)};
    cam.target = {j.at("target").at(0), j.at("target").at(1), j.at("target").at(2)};
    cam.up = {j.at("up").at(0), j.at("up").at(1), j.at("up").at(2)};
    cam.fov_y = j.at("fov_y");
    cam.width = j.at("width");
    cam.height = j.at("height");
    cam.near = j.at("near");
    cam.far = j.at("far");
    cam.validate();
    return cam;
}

inline std::string rig_hash(const std::vector<Camera>& rig) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Camera& cam : rig) arr.push_back(camera_to_json(cam));
    return hash_hex(fnv1a64(arr.dump()));
}

inline void write_rig(const std::string& path, const std::vector<Camera>& rig) {
    nlohmann::json j;
    j["cameras"] = nlohmann::json::array();
    for (const Camera& cam : rig) j["cameras"].push_back(camera_to_json(cam));
    j["rig_hash"] = rig_hash(rig);
    write_file_atomic(path, j.dump(2) + "\n");
}

inline std::vector<Camera> read_rig(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedFile, "bad rig json: " + std::string(e.what()));
    }
    std::vector<Camera> rig;
    try {
        for (const auto& cj : j.at("cameras")) rig.push_back(camera_from_json(cj));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedFile, "rig json missing fields: " + std::string(e.what()));
    }
    if (j.contains("rig_hash") && j["rig_hash"] != rig_hash(rig))
        throw Error(ErrorCode::ManifestMismatch, "rig hash does not match its cameras");
    return rig;
}

} // namespace dsplat
