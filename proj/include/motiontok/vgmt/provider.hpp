#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "motiontok/common.hpp"
#include "motiontok/numerics/feature_map.hpp"
#include "motiontok/skeleton/pose.hpp"

namespace motiontok::vgmt {

// Desk-scale visual feature provider. Stands in for a frozen backbone over
// real frames: each frame's 2D joints are rendered as Gaussian blobs onto a
// small grid; a trainable conv stem (owned by the model) turns the rendering
// into feature maps. Rendering is deterministic given the pose.
struct ProviderConfig {
    int map_size = 16;       // H' = W'
    int raw_channels = 3;    // rendered channels before the stem
    double blob_sigma = 1.0; // in grid cells
    double canvas_px = 1024.0;
    double depth_scale_mm = 400.0;

    void validate() const {
        if (map_size < 2) throw ConfigError("provider: map size must be >= 2");
        if (raw_channels != 3) throw ConfigError("provider: renderer emits exactly 3 channels");
        if (!(blob_sigma > 0.0)) throw ConfigError("provider: blob sigma must be positive");
        if (!(canvas_px > 0.0)) throw ConfigError("provider: canvas extent must be positive");
    }
};

struct RenderedSequence {
    num::FeatureMapSequence raw;       // F x S x S x 3 blob channels
    std::vector<float> ref_points;     // F x N x 2 grid coordinates (x, y)
};

// Maps a pixel coordinate onto the feature grid's continuous coordinates.
inline double pixel_to_grid(double px, const ProviderConfig& cfg) {
    return px / cfg.canvas_px * static_cast<double>(cfg.map_size - 1);
}

// Channels: 0 = blob mass, 1 = blob mass signed by joint identity,
// 2 = blob mass scaled by squashed relative depth.
inline RenderedSequence render_joints(const skeleton::PoseSequence& seq, const ProviderConfig& cfg,
                                      double ref_noise_px = 0.0, std::uint64_t noise_seed = 0) {
    cfg.validate();
    if (seq.space != skeleton::CoordinateSpace::pixel_rootrel)
        throw DataError("provider: sequence must be in pixel_rootrel space");
    const int s = cfg.map_size;
    const int n = seq.joints;
    RenderedSequence out;
    out.raw = num::FeatureMapSequence(seq.frames, s, s, 3);
    out.ref_points.assign(static_cast<std::size_t>(seq.frames) * static_cast<std::size_t>(n) * 2, 0.0f);

    Rng noise(noise_seed);
    const double twosig2 = 2.0 * cfg.blob_sigma * cfg.blob_sigma;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * cfg.blob_sigma)));
    for (int f = 0; f < seq.frames; ++f) {
        for (int j = 0; j < n; ++j) {
            double px = seq.at(f, j, 0);
            double py = seq.at(f, j, 1);
            if (ref_noise_px > 0.0) {
                px += ref_noise_px * noise.normal();
                py += ref_noise_px * noise.normal();
            }
            const double gx = pixel_to_grid(px, cfg);
            const double gy = pixel_to_grid(py, cfg);
            out.ref_points[(static_cast<std::size_t>(f) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)) * 2] =
                static_cast<float>(gx);
            out.ref_points[(static_cast<std::size_t>(f) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)) * 2 + 1] =
                static_cast<float>(gy);

            const double ident = static_cast<double>(j) / std::max(1, n - 1) - 0.5;
            const double depth = std::tanh(static_cast<double>(seq.at(f, j, 2)) / cfg.depth_scale_mm);
            const int x0 = std::clamp(static_cast<int>(std::floor(gx)) - radius, 0, s - 1);
            const int x1 = std::clamp(static_cast<int>(std::ceil(gx)) + radius, 0, s - 1);
            const int y0 = std::clamp(static_cast<int>(std::floor(gy)) - radius, 0, s - 1);
            const int y1 = std::clamp(static_cast<int>(std::ceil(gy)) + radius, 0, s - 1);
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    const double d2 = (x - gx) * (x - gx) + (y - gy) * (y - gy);
                    const float blob = static_cast<float>(std::exp(-d2 / twosig2));
                    out.raw.at(f, y, x, 0) += blob;
                    out.raw.at(f, y, x, 1) += static_cast<float>(ident) * blob;
                    out.raw.at(f, y, x, 2) += static_cast<float>(depth) * blob;
                }
            }
        }
    }
    return out;
}

}  // namespace motiontok::vgmt
