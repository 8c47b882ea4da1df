#pragma once

#include <cstring>
#include <sstream>
#include <vector>

#include "dsplat/gaussian.hpp"
#include "dsplat/io_util.hpp"
#include "dsplat/pointcloud.hpp"

namespace dsplat {

// Binary little-endian PLY in the splat-interchange property layout:
// x,y,z, f_dc_0..2, opacity (logit), scale_0..2 (log), rot_0..3 (w,x,y,z).
// Properties are float64 so the round trip is bit-exact; the five parameter
// groups survive write/read unchanged.
//
// Model bookkeeping rides along as header comments.

namespace detail {

inline void append_double_le(std::string& out, double v) {
    // Little-endian host assumed (x86-64 / aarch64 linux).
    char buf[sizeof(double)];
    std::memcpy(buf, &v, sizeof(double));
    out.append(buf, sizeof(double));
}

inline double read_double_le(const std::string& bytes, size_t& offset) {
    if (offset + sizeof(double) > bytes.size())
        throw Error(ErrorCode::MalformedFile, "ply payload truncated");
    double v;
    std::memcpy(&v, bytes.data() + offset, sizeof(double));
    offset += sizeof(double);
    return v;
}

struct PlyHeader {
    size_t vertex_count = 0;
    std::vector<std::string> properties;
    std::vector<std::pair<std::string, std::string>> comments;
    size_t payload_offset = 0;
};

inline PlyHeader parse_ply_header(const std::string& bytes) {
    size_t end = bytes.find("end_header\n");
    if (bytes.rfind("ply\n", 0) != 0 || end == std::string::npos)
        throw Error(ErrorCode::MalformedFile, "not a ply file");
    PlyHeader h;
    h.payload_offset = end + 11;

    std::istringstream header(bytes.substr(0, end));
    std::string line;
    bool little_endian = false;
    while (std::getline(header, line)) {
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "format") {
            std::string fmt;
            ls >> fmt;
            little_endian = (fmt == "binary_little_endian");
        } else if (word == "element") {
            std::string name;
            size_t n;
            ls >> name >> n;
            if (name == "vertex") h.vertex_count = n;
        } else if (word == "property") {
            std::string type, name;
            ls >> type >> name;
            if (type != "double")
                throw Error(ErrorCode::MalformedFile, "expected double properties, got " + type);
            h.properties.push_back(name);
        } else if (word == "comment") {
            std::string key;
            ls >> key;
            std::string value;
            std::getline(ls, value);
            if (!value.empty() && value.front() == ' ') value.erase(0, 1);
            h.comments.emplace_back(key, value);
        }
    }
    if (!little_endian) throw Error(ErrorCode::MalformedFile, "ply must be binary_little_endian");
    return h;
}

} // namespace detail

inline constexpr const char* kSplatProperties[14] = {
    "x",       "y",       "z",       "f_dc_0",  "f_dc_1", "f_dc_2", "opacity",
    "scale_0", "scale_1", "scale_2", "rot_0",   "rot_1",  "rot_2",  "rot_3",
};

inline std::string serialize_splat_ply(const SplatModel& model) {
    std::string out;
    std::ostringstream header;
    header << "ply\nformat binary_little_endian 1.0\n";
    header << "comment iteration " << model.iteration << "\n";
    if (model.origin_partition)
        header << "comment origin_partition " << *model.origin_partition << "\n";
    header << "element vertex " << model.size() << "\n";
    for (const char* p : kSplatProperties) header << "property double " << p << "\n";
    header << "end_header\n";
    out = header.str();
    out.reserve(out.size() + model.size() * 14 * sizeof(double));

    for (const Gaussian3D& g : model.gaussians) {
        detail::append_double_le(out, g.mu.x);
        detail::append_double_le(out, g.mu.y);
        detail::append_double_le(out, g.mu.z);
        detail::append_double_le(out, g.color.x);
        detail::append_double_le(out, g.color.y);
        detail::append_double_le(out, g.color.z);
        detail::append_double_le(out, g.opacity_logit);
        detail::append_double_le(out, g.log_scale.x);
        detail::append_double_le(out, g.log_scale.y);
        detail::append_double_le(out, g.log_scale.z);
        detail::append_double_le(out, g.rot.w);
        detail::append_double_le(out, g.rot.x);
        detail::append_double_le(out, g.rot.y);
        detail::append_double_le(out, g.rot.z);
    }
    return out;
}

inline void write_splat_ply(const std::string& path, const SplatModel& model) {
    write_file_atomic(path, serialize_splat_ply(model));
}

inline SplatModel parse_splat_ply(const std::string& bytes) {
    detail::PlyHeader h = detail::parse_ply_header(bytes);
    if (h.properties.size() != 14)
        throw Error(ErrorCode::MalformedFile, "splat ply must have 14 properties");
    for (int i = 0; i < 14; ++i)
        if (h.properties[static_cast<size_t>(i)] != kSplatProperties[i])
            throw Error(ErrorCode::MalformedFile, "unexpected property order in splat ply");

    SplatModel model;
    for (const auto& [key, value] : h.comments) {
        if (key == "iteration") model.iteration = std::stoll(value);
        if (key == "origin_partition") model.origin_partition = std::stoi(value);
    }
    size_t offset = h.payload_offset;
    model.gaussians.resize(h.vertex_count);
    for (Gaussian3D& g : model.gaussians) {
        g.mu.x = detail::read_double_le(bytes, offset);
        g.mu.y = detail::read_double_le(bytes, offset);
        g.mu.z = detail::read_double_le(bytes, offset);
        g.color.x = detail::read_double_le(bytes, offset);
        g.color.y = detail::read_double_le(bytes, offset);
        g.color.z = detail::read_double_le(bytes, offset);
        g.opacity_logit = detail::read_double_le(bytes, offset);
        g.log_scale.x = detail::read_double_le(bytes, offset);
        g.log_scale.y = detail::read_double_le(bytes, offset);
        g.log_scale.z = detail::read_double_le(bytes, offset);
        g.rot.w = detail::read_double_le(bytes, offset);
        g.rot.x = detail::read_double_le(bytes, offset);
        g.rot.y = detail::read_double_le(bytes, offset);
        g.rot.z = detail::read_double_le(bytes, offset);
    }
    return model;
}

inline SplatModel read_splat_ply(const std::string& path) {
    return parse_splat_ply(read_file(path));
}

// Point clouds use the same container with x,y,z, nx,ny,nz, red,green,blue
// (doubles in [0, 1]).
inline constexpr const char* kCloudProperties[9] = {
    "x", "y", "z", "nx", "ny", "nz", "red", "green", "blue",
};

inline void write_cloud_ply(const std::string& path, const PointCloud& pc) {
    std::string out;
    std::ostringstream header;
    header << "ply\nformat binary_little_endian 1.0\n";
    header << "element vertex " << pc.size() << "\n";
    for (const char* p : kCloudProperties) header << "property double " << p << "\n";
    header << "end_header\n";
    out = header.str();
    out.reserve(out.size() + pc.size() * 9 * sizeof(double));
    for (const SurfacePoint& p : pc.points) {
        detail::append_double_le(out, p.position.x);
        detail::append_double_le(out, p.position.y);
        detail::append_double_le(out, p.position.z);
        detail::append_double_le(out, p.normal.x);
        detail::append_double_le(out, p.normal.y);
        detail::append_double_le(out, p.normal.z);
        detail::append_double_le(out, p.color.x);
        detail::append_double_le(out, p.color.y);
        detail::append_double_le(out, p.color.z);
    }
    write_file_atomic(path, out);
}

inline PointCloud read_cloud_ply(const std::string& path) {
    std::string bytes = read_file(path);
    detail::PlyHeader h = detail::parse_ply_header(bytes);
    if (h.properties.size() != 9)
        throw Error(ErrorCode::MalformedFile, "cloud ply must have 9 properties");
    for (int i = 0; i < 9; ++i)
        if (h.properties[static_cast<size_t>(i)] != kCloudProperties[i])
            throw Error(ErrorCode::MalformedFile, "unexpected property order in cloud ply");

    PointCloud pc;
    size_t offset = h.payload_offset;
    pc.points.resize(h.vertex_count);
    for (SurfacePoint& p : pc.points) {
        p.position.x = detail::read_double_le(bytes, offset);
        p.position.y = detail::read_double_le(bytes, offset);
        p.position.z = detail::read_double_le(bytes, offset);
        p.normal.x = detail::read_double_le(bytes, offset);
        p.normal.y = detail::read_double_le(bytes, offset);
        p.normal.z = detail::read_double_le(bytes, offset);
        p.color.x = detail::read_double_le(bytes, offset);
        p.color.y = detail::read_double_le(bytes, offset);
        p.color.z = detail::read_double_le(bytes, offset);
    }
    return pc;
}

} // namespace dsplat
