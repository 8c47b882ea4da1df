#pragma once

#include <cstring>

#include <json.hpp>

#include "dsplat/io_util.hpp"
#include "dsplat/volume.hpp"

namespace dsplat {

// Raw little-endian float64 array plus a JSON sidecar describing the grid.
// <path> holds the scalars, <path>.json the metadata.
inline void write_volume(const std::string& path, const Volume& vol) {
    std::string bytes(reinterpret_cast<const char*>(vol.values.data()),
                      vol.values.size() * sizeof(double));
    write_file_atomic(path, bytes);

    nlohmann::json meta;
    meta["dims"] = {vol.nx, vol.ny, vol.nz};
    meta["spacing"] = vol.spacing;
    meta["origin"] = {vol.origin.x, vol.origin.y, vol.origin.z};
    meta["dtype"] = "float64";
    meta["order"] = "x-fastest";
    write_file_atomic(path + ".json", meta.dump(2) + "\n");
}

inline Volume read_volume(const std::string& path) {
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_file(path + ".json"));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedFile, "bad volume sidecar: " + std::string(e.what()));
    }
    Volume vol;
    try {
        vol.nx = meta.at("dims").at(0).get<int>();
        vol.ny = meta.at("dims").at(1).get<int>();
        vol.nz = meta.at("dims").at(2).get<int>();
        vol.spacing = meta.at("spacing").get<double>();
        vol.origin = {meta.at("origin").at(0).get<double>(), meta.at("origin").at(1).get<double>(),
                      meta.at("origin").at(2).get<double>()};
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedFile, "volume sidecar missing fields: " +
                                                  std::string(e.what()));
    }
    std::string bytes = read_file(path);
    size_t expected = static_cast<size_t>(vol.nx) * static_cast<size_t>(vol.ny) *
                      static_cast<size_t>(vol.nz) * sizeof(double);
    if (bytes.size() != expected)
        throw Error(ErrorCode::MalformedFile, "volume payload size mismatch for " + path);
    vol.values.resize(expected / sizeof(double));
    std::memcpy(vol.values.data(), bytes.data(), bytes.size());
    for (double v : vol.values)
        if (!std::isfinite(v))
            throw Error(ErrorCode::MalformedFile, "volume contains non-finite values: " + path);
    return vol;
}

} // namespace dsplat
