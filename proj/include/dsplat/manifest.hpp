#pragma once

#include <map>

#include <json.hpp>

#include "dsplat/hash.hpp"
#include "dsplat/io_util.hpp"

namespace dsplat {

// Every pipeline stage records what it consumed (content hashes), the seed,
// and its full configuration, so any artifact can be traced back to a
// re-runnable invocation.
inline void write_stage_manifest(const std::string& path, const std::string& stage,
                                 uint64_t seed, const nlohmann::json& config,
                                 const std::map<std::string, std::string>& input_paths) {
    nlohmann::json m;
    m["stage"] = stage;
    m["seed"] = seed;
    m["config"] = config;
    m["config_hash"] = hash_hex(fnv1a64(config.dump()));
    nlohmann::json inputs = nlohmann::json::object();
    for (const auto& [name, file] : input_paths) {
        nlohmann::json entry;
        entry["path"] = file;
        entry["fnv1a64"] = hash_file(file);
        inputs[name] = entry;
    }
    m["inputs"] = inputs;
    write_file_atomic(path, m.dump(2) + "\n");
}

inline std::string config_hash(const nlohmann::json& config) {
    return hash_hex(fnv1a64(config.dump()));
}

} // namespace dsplat
