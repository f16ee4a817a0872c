#pragma once

#include <cmath>
#include <vector>

#include "motiontok/common.hpp"

namespace motiontok::num {

// F per-frame feature grids of H x W x C, row-major (frame, row, col, chan).
struct FeatureMapSequence {
    std::vector<float> data;
    int frames = 0;
    int height = 0;
    int width = 0;
    int channels = 0;

    FeatureMapSequence() = default;
    FeatureMapSequence(int f, int h, int w, int c)
        : data(static_cast<std::size_t>(f) * static_cast<std::size_t>(h) * static_cast<std::size_t>(w) *
                   static_cast<std::size_t>(c),
               0.0f),
          frames(f),
          height(h),
          width(w),
          channels(c) {}

    std::size_t frame_size() const {
        return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
    }

    float* frame(int f) { return data.data() + static_cast<std::size_t>(f) * frame_size(); }
    const float* frame(int f) const { return data.data() + static_cast<std::size_t>(f) * frame_size(); }

    float& at(int f, int y, int x, int c) {
        return data[((static_cast<std::size_t>(f) * static_cast<std::size_t>(height) + static_cast<std::size_t>(y)) *
                         static_cast<std::size_t>(width) +
                     static_cast<std::size_t>(x)) *
                        static_cast<std::size_t>(channels) +
                    static_cast<std::size_t>(c)];
    }
    float at(int f, int y, int x, int c) const {
        return data[((static_cast<std::size_t>(f) * static_cast<std::size_t>(height) + static_cast<std::size_t>(y)) *
                         static_cast<std::size_t>(width) +
                     static_cast<std::size_t>(x)) *
                        static_cast<std::size_t>(channels) +
                    static_cast<std::size_t>(c)];
    }

    void validate() const {
        if (frames < 1 || height < 1 || width < 1 || channels < 1)
            throw DataError("feature map sequence: bad dimensions");
        if (data.size() != static_cast<std::size_t>(frames) * frame_size())
            throw DataError("feature map sequence: data size mismatch");
        for (float v : data)
            if (!std::isfinite(v)) throw DataError("feature map sequence: non-finite value");
    }
};

}  // namespace motiontok::num
