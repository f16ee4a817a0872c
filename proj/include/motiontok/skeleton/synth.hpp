#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "motiontok/common.hpp"
#include "motiontok/skeleton/layout.hpp"
#include "motiontok/skeleton/pose.hpp"

namespace motiontok::skeleton {

// Desk-scale stand-in for motion-capture clips: a smooth pseudo-gait driven
// by per-bone sinusoidal rotations around a rest skeleton. Rotations are
// orthonormal, so bone lengths are preserved exactly.
struct SynthConfig {
    int frames = 16;
    double frame_rate_hz = 50.0;
    double amp_deg_min = 5.0;
    double amp_deg_max = 25.0;
    double freq_hz_min = 0.5;
    double freq_hz_max = 2.0;
    double root_amp_mm = 120.0;
    double center_depth_mm = 4000.0;
    double amplitude_scale = 1.0;

    void validate() const {
        if (frames < 1) throw ConfigError("synth: frames must be >= 1");
        if (!(frame_rate_hz > 0.0)) throw ConfigError("synth: frame rate must be positive");
        if (amp_deg_min < 0.0 || amp_deg_max < amp_deg_min) throw ConfigError("synth: bad amplitude range");
        if (freq_hz_min <= 0.0 || freq_hz_max < freq_hz_min) throw ConfigError("synth: bad frequency range");
        if (amplitude_scale < 0.0) throw ConfigError("synth: amplitude scale must be >= 0");
        if (!(center_depth_mm > 1000.0)) throw ConfigError("synth: center depth must exceed 1 m");
    }
};

namespace detail {

using Mat3 = std::array<double, 9>;
using Vec3 = std::array<double, 3>;

inline Mat3 mat3_identity() { return {1, 0, 0, 0, 1, 0, 0, 0, 1}; }

inline Mat3 mat3_mul(const Mat3& a, const Mat3& b) {
    Mat3 c{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            c[static_cast<std::size_t>(i * 3 + j)] = a[static_cast<std::size_t>(i * 3)] * b[static_cast<std::size_t>(j)] +
                                                     a[static_cast<std::size_t>(i * 3 + 1)] * b[static_cast<std::size_t>(3 + j)] +
                                                     a[static_cast<std::size_t>(i * 3 + 2)] * b[static_cast<std::size_t>(6 + j)];
    return c;
}

inline Vec3 mat3_apply(const Mat3& m, const Vec3& v) {
    return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
            m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
            m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
}

// Rodrigues rotation about unit axis u by angle theta.
inline Mat3 axis_angle(const Vec3& u, double theta) {
    const double c = std::cos(theta), s = std::sin(theta), t = 1.0 - c;
    return {t * u[0] * u[0] + c,        t * u[0] * u[1] - s * u[2], t * u[0] * u[2] + s * u[1],
            t * u[0] * u[1] + s * u[2], t * u[1] * u[1] + c,        t * u[1] * u[2] - s * u[0],
            t * u[0] * u[2] - s * u[1], t * u[1] * u[2] + s * u[0], t * u[2] * u[2] + c};
}

// Parent of each H36M-17 joint; -1 for the pelvis root.
inline const std::array<int, 17>& h36m17_parents() {
    static const std::array<int, 17> parents = {-1, 0, 1, 2, 0, 4, 5, 0, 7, 8, 9, 8, 11, 12, 8, 14, 15};
    return parents;
}

// Bone offset from parent, millimeters, y pointing down in image convention.
inline const std::array<Vec3, 17>& h36m17_rest_offsets() {
    static const std::array<Vec3, 17> offsets = {{
        {0, 0, 0},        // pelvis
        {-130, 0, 0},     // r_hip
        {0, 450, 30},     // r_knee
        {0, 430, -30},    // r_ankle
        {130, 0, 0},      // l_hip
        {0, 450, 30},     // l_knee
        {0, 430, -30},    // l_ankle
        {0, -230, 0},     // spine
        {0, -230, 0},     // thorax
        {0, -120, 0},     // neck
        {0, -120, 0},     // head
        {170, 25, 0},     // l_shoulder
        {20, 280, 0},     // l_elbow
        {0, 250, 0},      // l_wrist
        {-170, 25, 0},    // r_shoulder
        {-20, 280, 0},    // r_elbow
        {0, 250, 0},      // r_wrist
    }};
    return offsets;
}

}  // namespace detail

// Deterministic per seed; frame_rate_hz comes from the config (50 by default
// so the 80/160/320 ms horizons land on frames 4/8/16).
inline PoseSequence synth_motion(const SynthConfig& config, std::uint64_t seed,
                                 const JointLayout& layout = h36m17()) {
    config.validate();
    if (layout.joint_count() != 17) throw ConfigError("synth: generator supports the 17-joint layout");

    Rng rng(seed);
    const int n_joints = 17;
    const auto& parents = detail::h36m17_parents();
    const auto& offsets = detail::h36m17_rest_offsets();
    const double deg2rad = 0.017453292519943295;

    struct BoneOsc {
        detail::Vec3 axis;
        double amp, freq, phase;
    };
    std::vector<BoneOsc> osc(static_cast<std::size_t>(n_joints));
    for (auto& o : osc) {
        detail::Vec3 a = {rng.normal(), rng.normal(), rng.normal()};
        double norm = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
        if (norm < 1e-9) { a = {0, 0, 1}; norm = 1.0; }
        o.axis = {a[0] / norm, a[1] / norm, a[2] / norm};
        o.amp = config.amplitude_scale * deg2rad * rng.uniform(config.amp_deg_min, config.amp_deg_max);
        o.freq = rng.uniform(config.freq_hz_min, config.freq_hz_max);
        o.phase = rng.uniform(0.0, 6.283185307179586);
    }
    struct RootOsc {
        double amp, freq, phase;
    };
    std::array<RootOsc, 3> root{};
    for (auto& r : root) {
        r.amp = config.amplitude_scale * config.root_amp_mm * rng.uniform(0.3, 1.0);
        r.freq = rng.uniform(config.freq_hz_min, config.freq_hz_max);
        r.phase = rng.uniform(0.0, 6.283185307179586);
    }

    PoseSequence out(config.frames, n_joints, CoordinateSpace::camera_mm, config.frame_rate_hz);
    std::vector<detail::Mat3> rot(static_cast<std::size_t>(n_joints));
    std::vector<detail::Vec3> pos(static_cast<std::size_t>(n_joints));
    for (int f = 0; f < config.frames; ++f) {
        const double t = static_cast<double>(f) / config.frame_rate_hz;
        const double tau = 6.283185307179586;
        pos[0] = {root[0].amp * std::sin(tau * root[0].freq * t + root[0].phase),
                  0.4 * root[1].amp * std::sin(tau * root[1].freq * t + root[1].phase),
                  config.center_depth_mm + root[2].amp * std::sin(tau * root[2].freq * t + root[2].phase)};
        rot[0] = detail::mat3_identity();
        for (int j = 1; j < n_joints; ++j) {
            const int p = parents[static_cast<std::size_t>(j)];
            const auto& o = osc[static_cast<std::size_t>(j)];
            const double theta = o.amp * std::sin(tau * o.freq * t + o.phase);
            rot[static_cast<std::size_t>(j)] =
                detail::mat3_mul(rot[static_cast<std::size_t>(p)], detail::axis_angle(o.axis, theta));
            const auto d = detail::mat3_apply(rot[static_cast<std::size_t>(j)], offsets[static_cast<std::size_t>(j)]);
            pos[static_cast<std::size_t>(j)] = {pos[static_cast<std::size_t>(p)][0] + d[0],
                                                pos[static_cast<std::size_t>(p)][1] + d[1],
                                                pos[static_cast<std::size_t>(p)][2] + d[2]};
        }
        for (int n = 0; n < n_joints; ++n)
            for (int c = 0; c < 3; ++c)
                out.at(f, n, c) = static_cast<float>(pos[static_cast<std::size_t>(n)][static_cast<std::size_t>(c)]);
    }
    return out;
}

// Bone lengths of one frame against the rest skeleton, as relative deviation.
inline double max_bone_length_deviation(const PoseSequence& seq) {
    const auto& parents = detail::h36m17_parents();
    const auto& offsets = detail::h36m17_rest_offsets();
    double worst = 0.0;
    for (int f = 0; f < seq.frames; ++f) {
        for (int j = 1; j < 17; ++j) {
            const int p = parents[static_cast<std::size_t>(j)];
            const auto& o = offsets[static_cast<std::size_t>(j)];
            const double rest = std::sqrt(o[0] * o[0] + o[1] * o[1] + o[2] * o[2]);
            const double dx = static_cast<double>(seq.at(f, j, 0)) - seq.at(f, p, 0);
            const double dy = static_cast<double>(seq.at(f, j, 1)) - seq.at(f, p, 1);
            const double dz = static_cast<double>(seq.at(f, j, 2)) - seq.at(f, p, 2);
            const double len = std::sqrt(dx * dx + dy * dy + dz * dz);
            worst = std::max(worst, std::fabs(len - rest) / rest);
        }
    }
    return worst;
}

}  // namespace motiontok::skeleton
