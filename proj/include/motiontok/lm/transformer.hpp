#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "motiontok/common.hpp"
#include "motiontok/lm/prompt.hpp"
#include "motiontok/numerics/graph.hpp"
#include "motiontok/numerics/nn.hpp"
#include "motiontok/numerics/params.hpp"

namespace motiontok::lm {

struct LmConfig {
    int layers = 4;
    int heads = 4;
    int model_dim = 256;
    int context_length = 768;
    int vocab_size = 0;
    int visual_dim = 0;  // conditioning width; 0 disables the visual pathway
    int ffn_mult = 4;

    void validate() const {
        if (layers < 1 || heads < 1 || model_dim < 1) throw ConfigError("lm: bad layer/head/dim values");
        if (model_dim % heads != 0) throw ConfigError("lm: model dim must divide evenly across heads");
        if (context_length < 8) throw ConfigError("lm: context too short");
        if (vocab_size < 2) throw ConfigError("lm: vocabulary missing");
        if (visual_dim < 0 || ffn_mult < 1) throw ConfigError("lm: bad visual dim or ffn multiplier");
    }
};

// Decoder-only transformer over the motion vocabulary. Visual conditioning
// enters as prefix positions: projected context rows are prepended to the
// token embeddings and attended causally like ordinary positions; logits are
// returned for text positions only.
template <typename T>
class TransformerLm {
public:
    TransformerLm(LmConfig cfg, std::uint64_t seed) : cfg_(cfg) {
        cfg_.validate();
        init_params(seed);
    }

    const LmConfig& config() const { return cfg_; }
    num::ParamStore<T>& params() { return params_; }
    const num::ParamStore<T>& params() const { return params_; }

    // vis_ctx: optional (M, visual_dim) node built by the caller (constant at
    // inference, a trainable fusion subgraph during fine-tuning).
    num::TensorId logits_graph(num::Graph<T>& g, const std::vector<int>& ids, num::TensorId vis_ctx = -1) {
        if (ids.empty()) throw DataError("lm: empty token sequence");
        const int t = static_cast<int>(ids.size());
        int m = 0;
        num::TensorId x;
        num::TensorId tok = num::gather_rows(g, params_.leaf(g, "tok_emb"), ids);
        if (vis_ctx >= 0) {
            if (cfg_.visual_dim == 0) throw ConfigError("lm: visual conditioning disabled in config");
            if (g.shape(vis_ctx).size() != 2 || g.shape(vis_ctx)[1] != cfg_.visual_dim)
                throw DataError("lm: visual context width mismatch");
            m = g.shape(vis_ctx)[0];
            num::TensorId proj = num::dense(g, vis_ctx, params_.leaf(g, "vis_proj.w"), params_.leaf(g, "vis_proj.b"));
            x = g.concat_rows({proj, tok});
        } else {
            x = tok;
        }
        const int l = m + t;
        if (l > cfg_.context_length) throw DataError("lm: context overflow");
        x = g.add(x, g.slice_rows(params_.leaf(g, "pos_emb"), 0, l));

        const int hd = cfg_.model_dim / cfg_.heads;
        for (int layer = 0; layer < cfg_.layers; ++layer) {
            const std::string p = "layer" + std::to_string(layer) + ".";
            num::TensorId h = num::layer_norm(g, x, params_.leaf(g, p + "ln1.g"), params_.leaf(g, p + "ln1.b"));
            auto heads_of = [&](const char* name) {
                num::TensorId hh = num::dense(g, h, params_.leaf(g, p + "attn.w" + name), params_.leaf(g, p + "attn.b" + name));
                return g.permute102(g.reshape(hh, {l, cfg_.heads, hd}));
            };
            num::TensorId q = heads_of("q");
            num::TensorId k = heads_of("k");
            num::TensorId v = heads_of("v");
            num::TensorId scores = g.scale(g.bmm_nt(q, k), 1.0 / std::sqrt(static_cast<double>(hd)));
            num::TensorId attn = g.softmax_rows(g.causal_mask(scores), l);
            num::TensorId out = g.reshape(g.permute102(g.bmm(attn, v)), {l, cfg_.model_dim});
            out = num::dense(g, out, params_.leaf(g, p + "attn.wo"), params_.leaf(g, p + "attn.bo"));
            x = g.add(x, out);

            num::TensorId h2 = num::layer_norm(g, x, params_.leaf(g, p + "ln2.g"), params_.leaf(g, p + "ln2.b"));
            num::TensorId mlp = num::dense(g, h2, params_.leaf(g, p + "mlp.fc1.w"), params_.leaf(g, p + "mlp.fc1.b"));
            mlp = num::dense(g, g.gelu(mlp), params_.leaf(g, p + "mlp.fc2.w"), params_.leaf(g, p + "mlp.fc2.b"));
            x = g.add(x, mlp);
        }
        x = num::layer_norm(g, x, params_.leaf(g, "final_ln.g"), params_.leaf(g, "final_ln.b"));
        num::TensorId logits = num::dense(g, x, params_.leaf(g, "unemb.w"), params_.leaf(g, "unemb.b"));
        return m > 0 ? g.slice_rows(logits, m, l) : logits;
    }

    // Masked autoregressive cross-entropy for one prompted sample.
    num::TensorId ar_loss_graph(num::Graph<T>& g, const PromptedSample& sample, num::TensorId vis_ctx = -1) {
        num::TensorId logits = logits_graph(g, sample.input_ids, vis_ctx);
        return num::cross_entropy_masked(g, logits, sample.target_ids, sample.loss_mask);
    }

    void require_finite_params() const {
        for (const auto& [name, p] : params_.all())
            for (T v : p.value)
                if (!std::isfinite(static_cast<double>(v)))
                    throw NumericError("lm: parameter " + name + " contains non-finite values");
    }

private:
    void init_params(std::uint64_t seed) {
        Rng rng(seed);
        const int d = cfg_.model_dim;
        num::init_normal(params_.create("tok_emb", {cfg_.vocab_size, d}), 0.08, rng);
        num::init_normal(params_.create("pos_emb", {cfg_.context_length, d}), 0.02, rng);
        auto dense_init = [&](const std::string& name, int in, int out) {
            num::init_uniform_fanin(params_.create(name + ".w", num::Shape{in, out}), in, rng);
            num::init_zeros(params_.create(name + ".b", {out}));
        };
        for (int layer = 0; layer < cfg_.layers; ++layer) {
            const std::string p = "layer" + std::to_string(layer) + ".";
            num::init_constant(params_.create(p + "ln1.g", {d}), 1.0);
            num::init_zeros(params_.create(p + "ln1.b", {d}));
            for (const char* n : {"q", "k", "v", "o"}) {
                num::init_uniform_fanin(params_.create(p + "attn.w" + n, {d, d}), d, rng);
                num::init_zeros(params_.create(p + "attn.b" + n, {d}));
            }
            num::init_constant(params_.create(p + "ln2.g", {d}), 1.0);
            num::init_zeros(params_.create(p + "ln2.b", {d}));
            dense_init(p + "mlp.fc1", d, cfg_.ffn_mult * d);
            dense_init(p + "mlp.fc2", cfg_.ffn_mult * d, d);
        }
        num::init_constant(params_.create("final_ln.g", {d}), 1.0);
        num::init_zeros(params_.create("final_ln.b", {d}));
        dense_init("unemb", d, cfg_.vocab_size);
        if (cfg_.visual_dim > 0) dense_init("vis_proj", cfg_.visual_dim, d);
    }

    LmConfig cfg_;
    num::ParamStore<T> params_;
};

}  // namespace motiontok::lm
