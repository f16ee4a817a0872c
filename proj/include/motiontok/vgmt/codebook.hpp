#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "motiontok/common.hpp"
#include "motiontok/skeleton/layout.hpp"

namespace motiontok::vgmt {

// Which encoding stream drives quantization (and which prototype feeds the
// decoder). Fused is the paired-prototype configuration; the single-stream
// modes exist for the ablation harness.
enum class StreamMode { fused, skeleton_only, visual_only };

inline std::string to_string(StreamMode m) {
    switch (m) {
        case StreamMode::fused: return "fused";
        case StreamMode::skeleton_only: return "skeleton_only";
        default: return "visual_only";
    }
}

inline StreamMode stream_mode_from_string(const std::string& s) {
    if (s == "fused") return StreamMode::fused;
    if (s == "skeleton_only") return StreamMode::skeleton_only;
    if (s == "visual_only") return StreamMode::visual_only;
    throw ConfigError("unknown stream mode: " + s);
}

// K paired prototypes; each code owns a visual half and a skeletal half of
// dimension D_half.
struct HybridCodebook {
    int codes = 0;    // K
    int dim = 0;      // D_half
    std::vector<float> visual;    // K x D_half
    std::vector<float> skeletal;  // K x D_half

    HybridCodebook() = default;
    HybridCodebook(int k, int d)
        : codes(k), dim(d),
          visual(static_cast<std::size_t>(k) * static_cast<std::size_t>(d), 0.0f),
          skeletal(static_cast<std::size_t>(k) * static_cast<std::size_t>(d), 0.0f) {}

    const float* visual_row(int k) const { return visual.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(dim); }
    const float* skeletal_row(int k) const { return skeletal.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(dim); }

    void validate() const {
        if (codes < 1 || dim < 1) throw DataError("codebook: bad dimensions");
        if (visual.size() != skeletal.size() ||
            visual.size() != static_cast<std::size_t>(codes) * static_cast<std::size_t>(dim))
            throw DataError("codebook: halves must both be K x D_half");
        for (float v : visual)
            if (!std::isfinite(v)) throw DataError("codebook: non-finite visual prototype");
        for (float v : skeletal)
            if (!std::isfinite(v)) throw DataError("codebook: non-finite skeletal prototype");
    }
};

struct QuantizeResult {
    int index = 0;
    double distance = 0.0;
};

// argmin_k of the summed squared distances over the active stream(s); ties
// break toward the lowest index. z_v / z_s may be null in single-stream modes.
inline QuantizeResult quantize_cell(const float* z_v, const float* z_s, const HybridCodebook& cb,
                                    StreamMode mode = StreamMode::fused) {
    if (mode != StreamMode::skeleton_only && z_v == nullptr) throw DataError("quantize: missing visual features");
    if (mode != StreamMode::visual_only && z_s == nullptr) throw DataError("quantize: missing skeletal features");
    QuantizeResult best{0, 0.0};
    double best_d = 0.0;
    for (int k = 0; k < cb.codes; ++k) {
        double d = 0.0;
        if (mode != StreamMode::skeleton_only) {
            const float* cv = cb.visual_row(k);
            for (int i = 0; i < cb.dim; ++i) {
                const double e = static_cast<double>(z_v[i]) - cv[i];
                d += e * e;
            }
        }
        if (mode != StreamMode::visual_only) {
            const float* cs = cb.skeletal_row(k);
            for (int i = 0; i < cb.dim; ++i) {
                const double e = static_cast<double>(z_s[i]) - cs[i];
                d += e * e;
            }
        }
        if (k == 0 || d < best_d) {
            best_d = d;
            best.index = k;
        }
    }
    best.distance = best_d;
    return best;
}

// W windows x N joints of code indices. Flattening is row-major (window,
// joint); the serializer owns the group ordering on top of this.
struct TokenGrid {
    int windows = 0;
    int joints = 0;
    std::vector<int> indices;  // W x N
    skeleton::JointLayout layout;
    double frame_rate_hz = 50.0;
    int downsample = 2;

    TokenGrid() : layout(skeleton::h36m17()) {}
    TokenGrid(int w, int n, const skeleton::JointLayout& l, double rate = 50.0, int ds = 2)
        : windows(w), joints(n), indices(static_cast<std::size_t>(w) * static_cast<std::size_t>(n), 0),
          layout(l), frame_rate_hz(rate), downsample(ds) {}

    int& at(int w, int n) { return indices[static_cast<std::size_t>(w) * static_cast<std::size_t>(joints) + static_cast<std::size_t>(n)]; }
    int at(int w, int n) const { return indices[static_cast<std::size_t>(w) * static_cast<std::size_t>(joints) + static_cast<std::size_t>(n)]; }

    void validate(int codebook_size) const {
        if (windows < 1 || joints < 1) throw DataError("token grid: bad dimensions");
        if (indices.size() != static_cast<std::size_t>(windows) * static_cast<std::size_t>(joints))
            throw DataError("token grid: index count mismatch");
        for (int k : indices)
            if (k < 0 || k >= codebook_size) throw DataError("token grid: index out of codebook range");
    }
};

// Usage-rate buckets matching the codebook-diagnostics thresholds:
// Frequent > 1%, Active in [0.01%, 1%], Underused in (0, 0.01%), Unused = 0.
enum class UsageBucket { frequent, active, underused, unused };

inline UsageBucket usage_bucket(double rate) {
    if (rate > 0.01) return UsageBucket::frequent;
    if (rate >= 0.0001) return UsageBucket::active;
    if (rate > 0.0) return UsageBucket::underused;
    return UsageBucket::unused;
}

// Inspection export: JSON with hex-encoded little-endian f32 payloads.
inline nlohmann::json codebook_to_json(const HybridCodebook& cb) {
    cb.validate();
    auto hex_payload = [](const std::vector<float>& v) {
        static const char* digits = "0123456789abcdef";
        std::string out;
        out.reserve(v.size() * 8);
        for (float f : v) {
            std::uint32_t bits;
            static_assert(sizeof(bits) == sizeof(f));
            std::memcpy(&bits, &f, 4);
            for (int shift = 0; shift < 32; shift += 8) {
                const unsigned byte = (bits >> shift) & 0xFF;
                out.push_back(digits[byte >> 4]);
                out.push_back(digits[byte & 0xF]);
            }
        }
        return out;
    };
    nlohmann::json j;
    j["codes"] = cb.codes;
    j["dim"] = cb.dim;
    j["encoding"] = "f32le_hex";
    j["visual"] = hex_payload(cb.visual);
    j["skeletal"] = hex_payload(cb.skeletal);
    return j;
}

}  // namespace motiontok::vgmt
