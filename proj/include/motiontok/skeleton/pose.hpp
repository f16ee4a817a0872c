#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "motiontok/common.hpp"
#include "motiontok/skeleton/layout.hpp"

namespace motiontok::skeleton {

enum class CoordinateSpace {
    camera_mm,      // 3D camera coordinates, millimeters, depth > 0
    pixel_rootrel,  // XY in pixels, Z relative to the root joint's depth
};

inline std::string to_string(CoordinateSpace s) {
    return s == CoordinateSpace::camera_mm ? "camera_mm" : "pixel_rootrel";
}

inline CoordinateSpace space_from_string(const std::string& s) {
    if (s == "camera_mm") return CoordinateSpace::camera_mm;
    if (s == "pixel_rootrel") return CoordinateSpace::pixel_rootrel;
    throw DataError("unknown coordinate space: " + s);
}

struct CameraModel {
    double fx = 1000.0, fy = 1000.0;
    double cx = 512.0, cy = 512.0;

    void validate() const {
        if (!(fx > 0.0) || !(fy > 0.0)) throw DataError("camera model: focal lengths must be positive");
    }
};

// F x N x 3 joint positions, row-major (frame, joint, xyz). Immutable by
// convention: operations return new sequences.
struct PoseSequence {
    std::vector<float> data;
    int frames = 0;
    int joints = 0;
    double frame_rate_hz = 50.0;
    CoordinateSpace space = CoordinateSpace::camera_mm;

    PoseSequence() = default;
    PoseSequence(int f, int n, CoordinateSpace sp, double rate = 50.0)
        : data(static_cast<std::size_t>(f) * static_cast<std::size_t>(n) * 3, 0.0f),
          frames(f),
          joints(n),
          frame_rate_hz(rate),
          space(sp) {}

    float& at(int f, int n, int c) {
        return data[(static_cast<std::size_t>(f) * static_cast<std::size_t>(joints) + static_cast<std::size_t>(n)) * 3 +
                    static_cast<std::size_t>(c)];
    }
    float at(int f, int n, int c) const {
        return data[(static_cast<std::size_t>(f) * static_cast<std::size_t>(joints) + static_cast<std::size_t>(n)) * 3 +
                    static_cast<std::size_t>(c)];
    }

    void validate() const {
        if (frames < 1) throw DataError("pose sequence: F must be >= 1");
        if (joints < 1) throw DataError("pose sequence: N must be >= 1");
        if (!(frame_rate_hz > 0.0)) throw DataError("pose sequence: frame rate must be positive");
        if (data.size() != static_cast<std::size_t>(frames) * static_cast<std::size_t>(joints) * 3)
            throw DataError("pose sequence: data size does not match F x N x 3");
        for (float v : data) {
            if (!std::isfinite(v)) throw DataError("pose sequence: non-finite value");
        }
    }
};

// Pinhole projection of XY into pixels plus root-relative depth. The root is
// not translated to the image origin; global pixel position is retained.
inline PoseSequence preprocess(const PoseSequence& seq, const CameraModel& cam,
                               const JointLayout& layout = h36m17()) {
    cam.validate();
    if (seq.space != CoordinateSpace::camera_mm)
        throw DataError("preprocess: input must be in camera_mm space");
    if (seq.joints != layout.joint_count()) throw DataError("preprocess: joint count does not match layout");

    PoseSequence out(seq.frames, seq.joints, CoordinateSpace::pixel_rootrel, seq.frame_rate_hz);
    for (int f = 0; f < seq.frames; ++f) {
        const double z_root = seq.at(f, layout.root_index, 2);
        for (int n = 0; n < seq.joints; ++n) {
            const double x = seq.at(f, n, 0);
            const double y = seq.at(f, n, 1);
            const double z = seq.at(f, n, 2);
            if (!(z > 0.0))
                throw DataError("preprocess: degenerate projection, joint depth must be positive");
            out.at(f, n, 0) = static_cast<float>(cam.fx * x / z + cam.cx);
            out.at(f, n, 1) = static_cast<float>(cam.fy * y / z + cam.cy);
            out.at(f, n, 2) = static_cast<float>(z - z_root);
        }
    }
    return out;
}

}  // namespace motiontok::skeleton
