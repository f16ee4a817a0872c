#pragma once

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "motiontok/common.hpp"
#include "motiontok/skeleton/pose.hpp"

namespace motiontok::skeleton {

// MSKL v1 pose files: one JSON header line, then a little-endian binary blob
// of F x N x 3 32-bit floats (row-major frame, joint, xyz). A pure-JSON
// variant with nested "data" arrays is accepted for small fixtures.

namespace detail {

inline nlohmann::json header_json(const PoseSequence& seq, const JointLayout& layout,
                                  const std::string& config_hash) {
    nlohmann::json h;
    h["version"] = 1;
    h["n_joints"] = seq.joints;
    h["frame_rate_hz"] = seq.frame_rate_hz;
    h["space"] = to_string(seq.space);
    h["layout"] = layout.names;
    if (!config_hash.empty()) h["config_hash"] = config_hash;
    return h;
}

inline void parse_header(const nlohmann::json& h, PoseSequence& seq, JointLayout* layout_names_out) {
    if (!h.contains("version") || h["version"].get<int>() != 1)
        throw DataError("mskl: unsupported version");
    seq.joints = h.at("n_joints").get<int>();
    seq.frame_rate_hz = h.at("frame_rate_hz").get<double>();
    seq.space = space_from_string(h.at("space").get<std::string>());
    if (layout_names_out && h.contains("layout"))
        layout_names_out->names = h["layout"].get<std::vector<std::string>>();
}

}  // namespace detail

inline void write_mskl(const std::string& path, const PoseSequence& seq,
                       const JointLayout& layout = h36m17(), const std::string& config_hash = "") {
    seq.validate();
    if (seq.joints != layout.joint_count()) throw DataError("mskl: layout joint count mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("mskl: cannot open for writing: " + path);
    out << detail::header_json(seq, layout, config_hash).dump() << "\n";
    static_assert(sizeof(float) == 4);
    out.write(reinterpret_cast<const char*>(seq.data.data()),
              static_cast<std::streamsize>(seq.data.size() * sizeof(float)));
    if (!out) throw DataError("mskl: write failed: " + path);
}

inline PoseSequence read_mskl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("mskl: cannot open: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string content = buffer.str();
    if (content.empty()) throw DataError("mskl: empty file: " + path);

    PoseSequence seq;
    // Pure-JSON variant: the whole file parses as one object with "data".
    if (content[0] == '{' && content.find("\"data\"") != std::string::npos) {
        nlohmann::json doc = nlohmann::json::parse(content, nullptr, false);
        if (!doc.is_discarded() && doc.contains("data")) {
            detail::parse_header(doc, seq, nullptr);
            const auto& frames = doc["data"];
            seq.frames = static_cast<int>(frames.size());
            seq.data.reserve(static_cast<std::size_t>(seq.frames) * static_cast<std::size_t>(seq.joints) * 3);
            for (const auto& frame : frames) {
                if (static_cast<int>(frame.size()) != seq.joints)
                    throw DataError("mskl: json frame has wrong joint count");
                for (const auto& joint : frame) {
                    if (joint.size() != 3) throw DataError("mskl: json joint must have 3 coordinates");
                    for (const auto& v : joint) seq.data.push_back(v.get<float>());
                }
            }
            seq.validate();
            return seq;
        }
    }

    const std::size_t nl = content.find('\n');
    if (nl == std::string::npos) throw DataError("mskl: missing header line");
    nlohmann::json header = nlohmann::json::parse(content.substr(0, nl), nullptr, false);
    if (header.is_discarded()) throw DataError("mskl: malformed header json");
    detail::parse_header(header, seq, nullptr);

    const std::size_t blob_bytes = content.size() - nl - 1;
    const std::size_t frame_bytes = static_cast<std::size_t>(seq.joints) * 3 * sizeof(float);
    if (frame_bytes == 0 || blob_bytes % frame_bytes != 0)
        throw DataError("mskl: blob size is not a whole number of frames");
    seq.frames = static_cast<int>(blob_bytes / frame_bytes);
    seq.data.resize(static_cast<std::size_t>(seq.frames) * static_cast<std::size_t>(seq.joints) * 3);
    std::memcpy(seq.data.data(), content.data() + nl + 1, blob_bytes);
    seq.validate();
    return seq;
}

inline PoseSequence read_mskl_json_text(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    PoseSequence seq;
    detail::parse_header(doc, seq, nullptr);
    const auto& frames = doc.at("data");
    seq.frames = static_cast<int>(frames.size());
    for (const auto& frame : frames)
        for (const auto& joint : frame)
            for (const auto& v : joint) seq.data.push_back(v.get<float>());
    seq.validate();
    return seq;
}

}  // namespace motiontok::skeleton
