#pragma once

#include <cmath>
#include <cstdint>

#include "motiontok/common.hpp"
#include "motiontok/skeleton/pose.hpp"

namespace motiontok::skeleton {

namespace detail {
inline void require_comparable(const PoseSequence& a, const PoseSequence& b) {
    if (a.frames != b.frames || a.joints != b.joints)
        throw DataError("metric: shape mismatch between sequences");
    if (a.space != b.space) throw DataError("metric: coordinate space mismatch");
}
}  // namespace detail

// Mean per-joint position error over all frames and joints.
inline double mpjpe(const PoseSequence& pred, const PoseSequence& gt) {
    detail::require_comparable(pred, gt);
    double acc = 0.0;
    for (int f = 0; f < pred.frames; ++f) {
        for (int n = 0; n < pred.joints; ++n) {
            const double dx = static_cast<double>(pred.at(f, n, 0)) - gt.at(f, n, 0);
            const double dy = static_cast<double>(pred.at(f, n, 1)) - gt.at(f, n, 1);
            const double dz = static_cast<double>(pred.at(f, n, 2)) - gt.at(f, n, 2);
            acc += std::sqrt(dx * dx + dy * dy + dz * dz);
        }
    }
    return acc / (static_cast<double>(pred.frames) * pred.joints);
}

// MPJPE at a single frame index.
inline double mpjpe_frame(const PoseSequence& pred, const PoseSequence& gt, int frame) {
    detail::require_comparable(pred, gt);
    if (frame < 0 || frame >= pred.frames) throw DataError("mpjpe_frame: frame out of range");
    double acc = 0.0;
    for (int n = 0; n < pred.joints; ++n) {
        const double dx = static_cast<double>(pred.at(frame, n, 0)) - gt.at(frame, n, 0);
        const double dy = static_cast<double>(pred.at(frame, n, 1)) - gt.at(frame, n, 1);
        const double dz = static_cast<double>(pred.at(frame, n, 2)) - gt.at(frame, n, 2);
        acc += std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    return acc / pred.joints;
}

// MPJPE over frames [0, upto_frame] inclusive (cumulative horizon reading).
inline double mpjpe_upto(const PoseSequence& pred, const PoseSequence& gt, int upto_frame) {
    detail::require_comparable(pred, gt);
    if (upto_frame < 0 || upto_frame >= pred.frames) throw DataError("mpjpe_upto: frame out of range");
    double acc = 0.0;
    for (int f = 0; f <= upto_frame; ++f) acc += mpjpe_frame(pred, gt, f);
    return acc / (upto_frame + 1);
}

// Optimal single per-sequence scale on the prediction, then MPJPE.
// s* = <pred, gt> / <pred, pred> over the flattened sequence.
inline double n_mpjpe(const PoseSequence& pred, const PoseSequence& gt) {
    detail::require_comparable(pred, gt);
    double pp = 0.0, pg = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        pp += static_cast<double>(pred.data[i]) * pred.data[i];
        pg += static_cast<double>(pred.data[i]) * gt.data[i];
    }
    if (pp == 0.0) throw DataError("n_mpjpe: all-zero prediction, optimal scale undefined");
    const double s = pg / pp;
    PoseSequence scaled = pred;
    for (auto& v : scaled.data) v = static_cast<float>(s * v);
    return mpjpe(scaled, gt);
}

// Maps a millisecond horizon to a frame count; the product must be integral.
inline int horizon_frames(std::int64_t ms, double rate_hz) {
    const double x = static_cast<double>(ms) * rate_hz / 1000.0;
    const double r = std::round(x);
    if (std::fabs(x - r) > 1e-9 || r < 1.0)
        throw DataError("horizon_frames: horizon does not land on an integral frame");
    return static_cast<int>(r);
}

// Mean frame-to-frame per-joint displacement; the scale against which
// reconstruction error is judged.
inline double per_frame_motion_magnitude(const PoseSequence& seq) {
    if (seq.frames < 2) return 0.0;
    double acc = 0.0;
    for (int f = 0; f + 1 < seq.frames; ++f) {
        for (int n = 0; n < seq.joints; ++n) {
            const double dx = static_cast<double>(seq.at(f + 1, n, 0)) - seq.at(f, n, 0);
            const double dy = static_cast<double>(seq.at(f + 1, n, 1)) - seq.at(f, n, 1);
            const double dz = static_cast<double>(seq.at(f + 1, n, 2)) - seq.at(f, n, 2);
            acc += std::sqrt(dx * dx + dy * dy + dz * dz);
        }
    }
    return acc / (static_cast<double>(seq.frames - 1) * seq.joints);
}

}  // namespace motiontok::skeleton
