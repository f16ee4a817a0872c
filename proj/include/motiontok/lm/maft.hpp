#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "motiontok/common.hpp"
#include "motiontok/lm/prompt.hpp"
#include "motiontok/numerics/deformable.hpp"
#include "motiontok/numerics/graph.hpp"
#include "motiontok/numerics/nn.hpp"
#include "motiontok/numerics/params.hpp"

namespace motiontok::lm {

struct MaftConfig {
    int fuse_dim = 64;
    int heads = 4;
    int ffn_mult = 2;
    int grid_patches = 2;   // patch grid per axis per frame
    int sampler_heads = 2;
    int sampler_points = 2;
    int map_channels = 32;  // stem feature channels from the tokenizer

    void validate() const {
        if (fuse_dim < 1 || heads < 1 || fuse_dim % heads != 0)
            throw ConfigError("maft: fuse dim must divide across heads");
        if (ffn_mult < 1 || grid_patches < 1) throw ConfigError("maft: bad ffn/patch values");
        if (sampler_heads < 1 || sampler_points < 1 || map_channels < 1)
            throw ConfigError("maft: bad sampler configuration");
    }
};

// Motion-aware fusion ahead of the language model: patch (grid) tokens query
// pose tokens through one cross-attention layer plus an FFN, both residual.
// The attention output projection and the FFN's second linear start at zero,
// so the fused stream equals the grid stream exactly at initialization. Pose
// tokens come from a deformable sampler around the 2D joint projections.
template <typename T>
class Maft {
public:
    Maft(MaftConfig cfg, std::uint64_t seed) : cfg_(cfg) {
        cfg_.validate();
        init_params(seed);
    }

    const MaftConfig& config() const { return cfg_; }
    num::ParamStore<T>& params() { return params_; }
    const num::ParamStore<T>& params() const { return params_; }

    // Cross-attention + FFN with residuals; grid rows are queries, pose rows
    // are keys/values.
    num::TensorId fuse_graph(num::Graph<T>& g, num::TensorId z_grid, num::TensorId z_pose) {
        const num::Shape& sg_ = g.shape(z_grid);
        const num::Shape& sp_ = g.shape(z_pose);
        if (sg_.size() != 2 || sp_.size() != 2 || sg_[1] != cfg_.fuse_dim || sp_[1] != cfg_.fuse_dim)
            throw DataError("maft: grid/pose token width mismatch");
        const int gq = sg_[0], pk = sp_[0];
        const int hd = cfg_.fuse_dim / cfg_.heads;

        num::TensorId h = num::layer_norm(g, z_grid, params_.leaf(g, "maft.ln1.g"), params_.leaf(g, "maft.ln1.b"));
        auto split = [&](num::TensorId rows, int count, const char* name) {
            num::TensorId hh = num::dense(g, rows, params_.leaf(g, std::string("maft.attn.w") + name),
                                          params_.leaf(g, std::string("maft.attn.b") + name));
            return g.permute102(g.reshape(hh, {count, cfg_.heads, hd}));
        };
        num::TensorId q = split(h, gq, "q");
        num::TensorId k = split(z_pose, pk, "k");
        num::TensorId v = split(z_pose, pk, "v");
        num::TensorId scores = g.scale(g.bmm_nt(q, k), 1.0 / std::sqrt(static_cast<double>(hd)));
        num::TensorId attn = g.softmax_rows(scores, pk);
        num::TensorId out = g.reshape(g.permute102(g.bmm(attn, v)), {gq, cfg_.fuse_dim});
        out = num::dense(g, out, params_.leaf(g, "maft.attn.wo"), params_.leaf(g, "maft.attn.bo"));
        num::TensorId x = g.add(z_grid, out);

        num::TensorId h2 = num::layer_norm(g, x, params_.leaf(g, "maft.ln2.g"), params_.leaf(g, "maft.ln2.b"));
        num::TensorId ffn = num::dense(g, h2, params_.leaf(g, "maft.ffn.fc1.w"), params_.leaf(g, "maft.ffn.fc1.b"));
        ffn = num::dense(g, g.gelu(ffn), params_.leaf(g, "maft.ffn.fc2.w"), params_.leaf(g, "maft.ffn.fc2.b"));
        return g.add(x, ffn);
    }

    // Frozen stem maps + joint reference points -> fused conditioning rows
    // (F * patches^2, fuse_dim) for the language model's visual prefix.
    num::TensorId conditioning_graph(num::Graph<T>& g, const PeConditioning& cond) {
        const int f = cond.maps.frames;
        const int n = static_cast<int>(cond.refs.size() / 2) / f;
        if (cond.maps.channels != cfg_.map_channels) throw DataError("maft: stem channel mismatch");
        std::vector<num::TensorId> pose_rows, grid_rows;
        for (int i = 0; i < f; ++i) {
            std::vector<T> data(cond.maps.frame_size());
            const float* src = cond.maps.frame(i);
            for (std::size_t j = 0; j < data.size(); ++j) data[j] = static_cast<T>(src[j]);
            num::TensorId map = g.input({cond.maps.height, cond.maps.width, cond.maps.channels}, std::move(data));

            std::vector<float> refs(cond.refs.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(i) * static_cast<std::size_t>(n) * 2),
                                    cond.refs.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(i + 1) * static_cast<std::size_t>(n) * 2));
            std::vector<T> ref_data(refs.size());
            for (std::size_t j = 0; j < refs.size(); ++j) ref_data[j] = static_cast<T>(refs[j]);
            num::TensorId query = num::bilinear_sample(g, map, g.input({n, 2}, std::move(ref_data)));
            pose_rows.push_back(num::deformable_attention(g, params_, "maft.samp", query, map, refs,
                                                          cfg_.sampler_heads, cfg_.sampler_points, cfg_.map_channels));
            num::TensorId pooled = num::avg_pool_patches(g, map, cfg_.grid_patches);
            grid_rows.push_back(g.reshape(pooled, {cfg_.grid_patches * cfg_.grid_patches, cfg_.map_channels}));
        }
        num::TensorId z_pose = num::dense(g, g.concat_rows(pose_rows), params_.leaf(g, "maft.pose_proj.w"),
                                          params_.leaf(g, "maft.pose_proj.b"));
        num::TensorId z_grid = num::dense(g, g.concat_rows(grid_rows), params_.leaf(g, "maft.grid_proj.w"),
                                          params_.leaf(g, "maft.grid_proj.b"));
        return fuse_graph(g, z_grid, z_pose);
    }

    int conditioning_rows(int frames) const { return frames * cfg_.grid_patches * cfg_.grid_patches; }

    // Parameter count of the fusion block (cross-attention + FFN + norms) at
    // an arbitrary width; used to sanity-check the overhead arithmetic at
    // reference scale.
    static std::size_t block_param_count(int dim, int ffn_mult) {
        const std::size_t d = static_cast<std::size_t>(dim);
        const std::size_t f = static_cast<std::size_t>(ffn_mult) * d;
        std::size_t count = 0;
        count += 4 * (d * d + d);      // wq, wk, wv, wo with biases
        count += d * f + f + f * d + d;  // ffn
        count += 2 * (2 * d);          // two layer norms
        return count;
    }

private:
    void init_params(std::uint64_t seed) {
        Rng rng(seed);
        const int c = cfg_.map_channels;
        const int d = cfg_.fuse_dim;
        num::create_deformable_params(params_, "maft.samp", c, cfg_.sampler_heads, cfg_.sampler_points);
        num::init_uniform_fanin(params_.create("maft.pose_proj.w", {c, d}), c, rng);
        num::init_zeros(params_.create("maft.pose_proj.b", {d}));
        num::init_uniform_fanin(params_.create("maft.grid_proj.w", {c, d}), c, rng);
        num::init_zeros(params_.create("maft.grid_proj.b", {d}));

        num::init_constant(params_.create("maft.ln1.g", {d}), 1.0);
        num::init_zeros(params_.create("maft.ln1.b", {d}));
        for (const char* n : {"q", "k", "v"}) {
            num::init_uniform_fanin(params_.create(std::string("maft.attn.w") + n, {d, d}), d, rng);
            num::init_zeros(params_.create(std::string("maft.attn.b") + n, {d}));
        }
        // Zero output projection and zero second FFN linear: identity at init.
        num::init_zeros(params_.create("maft.attn.wo", {d, d}));
        num::init_zeros(params_.create("maft.attn.bo", {d}));
        num::init_constant(params_.create("maft.ln2.g", {d}), 1.0);
        num::init_zeros(params_.create("maft.ln2.b", {d}));
        num::init_uniform_fanin(params_.create("maft.ffn.fc1.w", {d, cfg_.ffn_mult * d}), d, rng);
        num::init_zeros(params_.create("maft.ffn.fc1.b", {cfg_.ffn_mult * d}));
        num::init_zeros(params_.create("maft.ffn.fc2.w", {cfg_.ffn_mult * d, d}));
        num::init_zeros(params_.create("maft.ffn.fc2.b", {d}));
    }

    MaftConfig cfg_;
    num::ParamStore<T> params_;
};

}  // namespace motiontok::lm
