#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "motiontok/common.hpp"
#include "motiontok/numerics/deformable.hpp"
#include "motiontok/numerics/feature_map.hpp"
#include "motiontok/numerics/graph.hpp"
#include "motiontok/numerics/nn.hpp"
#include "motiontok/numerics/params.hpp"
#include "motiontok/skeleton/layout.hpp"
#include "motiontok/skeleton/pose.hpp"
#include "motiontok/vgmt/codebook.hpp"
#include "motiontok/vgmt/provider.hpp"

namespace motiontok::vgmt {

struct VgmtConfig {
    int codebook_size = 256;  // K
    int code_dim = 32;        // D_half
    int downsample = 2;       // input frames per window
    int vsa_heads = 4;
    int vsa_points = 4;
    int stem_mid_channels = 16;
    ProviderConfig provider;
    StreamMode mode = StreamMode::fused;
    double beta_s = 0.5;
    double beta_v = 0.5;
    double beta_commit = 0.25;
    // Fixed affine that brings pixel/depth coordinates to O(1) activations;
    // inverted when decoding back to poses.
    std::array<double, 3> input_center = {512.0, 512.0, 0.0};
    std::array<double, 3> input_scale = {256.0, 256.0, 256.0};

    void validate() const {
        if (codebook_size < 1) throw ConfigError("vgmt: codebook size must be >= 1");
        if (code_dim < 1) throw ConfigError("vgmt: code dim must be >= 1");
        if (downsample < 1) throw ConfigError("vgmt: downsample must be >= 1");
        if (vsa_heads < 1 || vsa_points < 1) throw ConfigError("vgmt: vsa heads/points must be >= 1");
        if (beta_s < 0.0 || beta_v < 0.0 || beta_commit < 0.0)
            throw ConfigError("vgmt: commitment weights must be non-negative");
        for (double s : input_scale)
            if (!(s > 0.0)) throw ConfigError("vgmt: input scale must be positive");
        provider.validate();
    }
};

// The Vision-Guided Motion Tokenizer: dual-stream encoders over the
// joint-temporal grid, deformable visual sampling, a paired codebook, and a
// mirrored decoder. Templated on the scalar so gradient checks can run the
// identical model in double precision.
template <typename T>
class Vgmt {
public:
    Vgmt(VgmtConfig cfg, std::uint64_t seed, skeleton::JointLayout layout = skeleton::h36m17())
        : cfg_(std::move(cfg)), layout_(std::move(layout)) {
        cfg_.validate();
        layout_.validate();
        init_params(seed);
    }

    const VgmtConfig& config() const { return cfg_; }
    const skeleton::JointLayout& layout() const { return layout_; }
    num::ParamStore<T>& params() { return params_; }
    const num::ParamStore<T>& params() const { return params_; }

    // ---- input scaling ----

    std::vector<T> normalize(const skeleton::PoseSequence& seq) const {
        std::vector<T> out(seq.data.size());
        for (std::size_t i = 0; i < seq.data.size(); ++i) {
            const int c = static_cast<int>(i % 3);
            out[i] = static_cast<T>((static_cast<double>(seq.data[i]) - cfg_.input_center[static_cast<std::size_t>(c)]) /
                                    cfg_.input_scale[static_cast<std::size_t>(c)]);
        }
        return out;
    }

    skeleton::PoseSequence denormalize(const std::vector<T>& values, int frames, double frame_rate) const {
        skeleton::PoseSequence seq(frames, layout_.joint_count(), skeleton::CoordinateSpace::pixel_rootrel, frame_rate);
        if (values.size() != seq.data.size()) throw NumericError("vgmt: denormalize size mismatch");
        for (std::size_t i = 0; i < values.size(); ++i) {
            const int c = static_cast<int>(i % 3);
            seq.data[i] = static_cast<float>(static_cast<double>(values[i]) * cfg_.input_scale[static_cast<std::size_t>(c)] +
                                             cfg_.input_center[static_cast<std::size_t>(c)]);
        }
        return seq;
    }

    // ---- graph builders ----

    // Two residual conv layers and a strided temporal conv halving frames.
    num::TensorId encode_skeleton_graph(num::Graph<T>& g, num::TensorId x_norm) {
        num::TensorId h = num::conv2d_grid(g, x_norm, leaf(g, "skel_enc.stem.w"), leaf(g, "skel_enc.stem.b"));
        h = residual(g, h, "skel_enc.res1");
        h = residual(g, h, "skel_enc.res2");
        return num::conv2d_grid(g, h, leaf(g, "skel_enc.down.w"), leaf(g, "skel_enc.down.b"), cfg_.downsample, 1);
    }

    // Trainable stem over one rendered frame: raw blobs -> (S, S, C) features.
    num::TensorId stem_graph(num::Graph<T>& g, const num::FeatureMapSequence& raw, int frame) {
        std::vector<T> data(raw.frame_size());
        const float* src = raw.frame(frame);
        for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<T>(src[i]);
        num::TensorId x = g.input({raw.height, raw.width, raw.channels}, std::move(data));
        num::TensorId h = g.gelu(num::conv2d_grid(g, x, leaf(g, "provider.conv1.w"), leaf(g, "provider.conv1.b")));
        return num::conv2d_grid(g, h, leaf(g, "provider.conv2.w"), leaf(g, "provider.conv2.b"));
    }

    // The deformable-attention operator around projected joint positions:
    // offsets and per-head softmax weights predicted from the query, samples
    // aggregated and projected back to the code dimension.
    num::TensorId vsa_graph(num::Graph<T>& g, num::TensorId query, num::TensorId map,
                            const std::vector<float>& refs) {
        return num::deformable_attention(g, params_, "vsa", query, map, refs, cfg_.vsa_heads, cfg_.vsa_points,
                                         cfg_.code_dim);
    }

    // Per frame: stem features, initial query sampled at the projected joint,
    // VSA refinement. Stacks to (F, N, C).
    num::TensorId visual_features_graph(num::Graph<T>& g, const RenderedSequence& rendered) {
        const int f = rendered.raw.frames;
        const int n = layout_.joint_count();
        if (rendered.ref_points.size() != static_cast<std::size_t>(f) * static_cast<std::size_t>(n) * 2)
            throw DataError("vgmt: reference points do not match maps");
        std::vector<num::TensorId> per_frame;
        per_frame.reserve(static_cast<std::size_t>(f));
        for (int i = 0; i < f; ++i) {
            num::TensorId map = stem_graph(g, rendered.raw, i);
            std::vector<float> refs(rendered.ref_points.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(i) * static_cast<std::size_t>(n) * 2),
                                    rendered.ref_points.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(i + 1) * static_cast<std::size_t>(n) * 2));
            std::vector<T> ref_data(refs.size());
            for (std::size_t k = 0; k < refs.size(); ++k) ref_data[k] = static_cast<T>(refs[k]);
            num::TensorId query = num::bilinear_sample(g, map, g.input({n, 2}, std::move(ref_data)));
            per_frame.push_back(vsa_graph(g, query, map, refs));
        }
        return g.reshape(g.concat_rows(per_frame), {f, n, cfg_.code_dim});
    }

    // Identical to the skeleton encoder minus its first conv.
    num::TensorId encode_visual_graph(num::Graph<T>& g, num::TensorId visual_features) {
        num::TensorId h = residual(g, visual_features, "vis_enc.res1");
        h = residual(g, h, "vis_enc.res2");
        return num::conv2d_grid(g, h, leaf(g, "vis_enc.down.w"), leaf(g, "vis_enc.down.b"), cfg_.downsample, 1);
    }

    // Nearest-neighbor temporal upsampling then convs mirroring the encoder.
    num::TensorId decode_graph(num::Graph<T>& g, num::TensorId codes_wnc) {
        num::TensorId h = num::upsample_rows(g, codes_wnc, cfg_.downsample);
        h = num::conv2d_grid(g, h, leaf(g, "dec.up.w"), leaf(g, "dec.up.b"));
        h = residual(g, h, "dec.res1");
        h = residual(g, h, "dec.res2");
        return num::conv2d_grid(g, h, leaf(g, "dec.out.w"), leaf(g, "dec.out.b"));
    }

    // ---- quantization ----

    HybridCodebook codebook() const {
        HybridCodebook cb(cfg_.codebook_size, cfg_.code_dim);
        const auto& v = params_.at("codebook.visual").value;
        const auto& s = params_.at("codebook.skeletal").value;
        for (std::size_t i = 0; i < cb.visual.size(); ++i) {
            cb.visual[i] = static_cast<float>(v[i]);
            cb.skeletal[i] = static_cast<float>(s[i]);
        }
        return cb;
    }

    // Per-(window, joint) argmin against the shared codebook.
    std::vector<int> quantize_cells(const std::vector<T>* z_v, const std::vector<T>* z_s, int cells) const {
        const HybridCodebook cb = codebook();
        std::vector<int> out(static_cast<std::size_t>(cells));
        std::vector<float> zv_cell(static_cast<std::size_t>(cfg_.code_dim));
        std::vector<float> zs_cell(static_cast<std::size_t>(cfg_.code_dim));
        for (int i = 0; i < cells; ++i) {
            const float* pv = nullptr;
            const float* ps = nullptr;
            if (z_v) {
                for (int c = 0; c < cfg_.code_dim; ++c)
                    zv_cell[static_cast<std::size_t>(c)] = static_cast<float>(
                        (*z_v)[static_cast<std::size_t>(i) * static_cast<std::size_t>(cfg_.code_dim) + static_cast<std::size_t>(c)]);
                pv = zv_cell.data();
            }
            if (z_s) {
                for (int c = 0; c < cfg_.code_dim; ++c)
                    zs_cell[static_cast<std::size_t>(c)] = static_cast<float>(
                        (*z_s)[static_cast<std::size_t>(i) * static_cast<std::size_t>(cfg_.code_dim) + static_cast<std::size_t>(c)]);
                ps = zs_cell.data();
            }
            out[static_cast<std::size_t>(i)] = quantize_cell(pv, ps, cb, cfg_.mode).index;
        }
        return out;
    }

    // ---- end-to-end ----

    TokenGrid tokenize(const skeleton::PoseSequence& seq, const RenderedSequence& rendered) {
        require_finite_params();
        check_input(seq);
        num::Graph<T> g;
        const int w = seq.frames / cfg_.downsample;
        const int n = layout_.joint_count();
        const int cells = w * n;

        const std::vector<T>* zv_ptr = nullptr;
        const std::vector<T>* zs_ptr = nullptr;
        std::vector<T> zv_detached, zs_detached;
        if (cfg_.mode != StreamMode::skeleton_only) {
            num::TensorId v = visual_features_graph(g, rendered);
            zv_detached = g.val(encode_visual_graph(g, v));
            zv_ptr = &zv_detached;
        }
        if (cfg_.mode != StreamMode::visual_only) {
            num::TensorId x = g.input({seq.frames, n, 3}, normalize(seq));
            zs_detached = g.val(encode_skeleton_graph(g, x));
            zs_ptr = &zs_detached;
        }

        TokenGrid grid(w, n, layout_, seq.frame_rate_hz, cfg_.downsample);
        grid.indices = quantize_cells(zv_ptr, zs_ptr, cells);
        return grid;
    }

    TokenGrid tokenize(const skeleton::PoseSequence& seq) {
        RenderedSequence rendered;
        if (cfg_.mode != StreamMode::skeleton_only) rendered = render_joints(seq, cfg_.provider);
        return tokenize(seq, rendered);
    }

    skeleton::PoseSequence decode(const TokenGrid& grid) {
        require_finite_params();
        grid.validate(cfg_.codebook_size);
        // The decoder consumes the skeletal prototype; the visual half exists
        // for quantization only (visual-only mode decodes its own half).
        const std::string table =
            cfg_.mode == StreamMode::visual_only ? "codebook.visual" : "codebook.skeletal";
        num::Graph<T> g;
        num::TensorId rows = num::gather_rows(g, leaf(g, table), grid.indices);
        num::TensorId codes = g.reshape(rows, {grid.windows, grid.joints, cfg_.code_dim});
        num::TensorId out = decode_graph(g, codes);
        return denormalize(g.val(out), grid.windows * cfg_.downsample, grid.frame_rate_hz);
    }

    // Runs only the trainable stem over a rendering and extracts the feature
    // maps as plain data (for consumers treating this model as frozen).
    num::FeatureMapSequence stem_maps(const RenderedSequence& rendered) {
        num::FeatureMapSequence out(rendered.raw.frames, rendered.raw.height, rendered.raw.width, cfg_.code_dim);
        for (int f = 0; f < rendered.raw.frames; ++f) {
            num::Graph<T> g;
            num::TensorId map = stem_graph(g, rendered.raw, f);
            const auto& v = g.val(map);
            float* dst = out.frame(f);
            for (std::size_t i = 0; i < v.size(); ++i) dst[i] = static_cast<float>(v[i]);
        }
        return out;
    }

    num::TensorId leaf(num::Graph<T>& g, const std::string& name) { return params_.leaf(g, name); }

    void check_input(const skeleton::PoseSequence& seq) const {
        if (seq.space != skeleton::CoordinateSpace::pixel_rootrel)
            throw DataError("vgmt: sequence must be preprocessed to pixel_rootrel");
        if (seq.joints != layout_.joint_count()) throw DataError("vgmt: joint count mismatch");
        if (seq.frames % cfg_.downsample != 0)
            throw DataError("vgmt: frame count must be divisible by the window size");
    }

    void require_finite_params() const {
        for (const auto& [name, p] : params_.all())
            for (T v : p.value)
                if (!std::isfinite(static_cast<double>(v)))
                    throw NumericError("vgmt: parameter " + name + " contains non-finite values");
    }

private:
    num::TensorId residual(num::Graph<T>& g, num::TensorId h, const std::string& prefix) {
        return g.add(h, num::conv2d_grid(g, g.gelu(h), leaf(g, prefix + ".w"), leaf(g, prefix + ".b")));
    }

    void init_params(std::uint64_t seed) {
        Rng rng(seed);
        const int c = cfg_.code_dim;
        const int mid = cfg_.stem_mid_channels;
        auto conv = [&](const std::string& name, int ci, int co) {
            auto& w = params_.create(name + ".w", {3, 3, ci, co});
            num::init_uniform_fanin(w, 9 * ci, rng);
            num::init_zeros(params_.create(name + ".b", {co}));
        };
        conv("provider.conv1", cfg_.provider.raw_channels, mid);
        conv("provider.conv2", mid, c);
        conv("skel_enc.stem", 3, c);
        conv("skel_enc.res1", c, c);
        conv("skel_enc.res2", c, c);
        conv("skel_enc.down", c, c);
        conv("vis_enc.res1", c, c);
        conv("vis_enc.res2", c, c);
        conv("vis_enc.down", c, c);
        conv("dec.up", c, c);
        conv("dec.res1", c, c);
        conv("dec.res2", c, c);
        conv("dec.out", c, 3);

        // Zero-initialized offset and weight predictors: at init VSA reduces
        // to a plain bilinear sample at the reference point.
        num::create_deformable_params(params_, "vsa", c, cfg_.vsa_heads, cfg_.vsa_points);

        auto& cv = params_.create("codebook.visual", {cfg_.codebook_size, c});
        num::init_uniform_fanin(cv, c, rng);
        auto& cs = params_.create("codebook.skeletal", {cfg_.codebook_size, c});
        num::init_uniform_fanin(cs, c, rng);
    }

    VgmtConfig cfg_;
    skeleton::JointLayout layout_;
    num::ParamStore<T> params_;
};

}  // namespace motiontok::vgmt
