#pragma once

#include <vector>

#include "motiontok/common.hpp"
#include "motiontok/numerics/graph.hpp"
#include "motiontok/numerics/nn.hpp"
#include "motiontok/vgmt/model.hpp"

namespace motiontok::vgmt {

struct VqBetas {
    double beta_s = 0.5;
    double beta_v = 0.5;
    double beta_commit = 0.25;

    void validate() const {
        if (beta_s < 0.0 || beta_v < 0.0 || beta_commit < 0.0)
            throw ConfigError("vq loss: commitment weights must be non-negative");
    }
};

// Constants for the stop-gradient branches, captured from a reference forward
// pass. Finite-difference checks need them: central differences measure the
// true derivative of the forward value, while sg[.] defines the estimator by
// holding its branch fixed, so the FD evaluation must hold it fixed too.
template <typename T>
struct VqFreeze {
    std::vector<T> z_s, z_v;    // encoder window features
    std::vector<T> c_s, c_v;    // selected prototypes
};

// The VQ objective on already-built graph tensors:
//   L = |x - x_hat|^2 + beta_s |sg[z_s] - c_s|^2 + beta_v |sg[z_v] - c_v|^2
//       + beta_commit (|z_s - sg[c_s]|^2 + |z_v - sg[c_v]|^2)
// Means over elements. Pass -1 for a stream that does not exist; with
// beta_commit = 0 the encoders receive gradient only through the
// reconstruction's straight-through path.
template <typename T>
num::TensorId vq_loss_terms(num::Graph<T>& g, num::TensorId x, num::TensorId x_hat, num::TensorId z_v,
                            num::TensorId z_s, num::TensorId c_v_hat, num::TensorId c_s_hat,
                            const VqBetas& betas, const VqFreeze<T>* freeze = nullptr) {
    betas.validate();
    auto frozen_or_sg = [&](num::TensorId expr, const std::vector<T>* values) {
        if (freeze) return g.input(g.shape(expr), *values);
        return g.stop_gradient(expr);
    };
    num::TensorId loss = g.mean_sq_diff(x_hat, x);
    if (z_s >= 0) {
        loss = g.add(loss, g.scale(g.mean_sq_diff(frozen_or_sg(z_s, freeze ? &freeze->z_s : nullptr), c_s_hat),
                                   betas.beta_s));
        if (betas.beta_commit > 0.0)
            loss = g.add(loss, g.scale(g.mean_sq_diff(z_s, frozen_or_sg(c_s_hat, freeze ? &freeze->c_s : nullptr)),
                                       betas.beta_commit));
    }
    if (z_v >= 0) {
        loss = g.add(loss, g.scale(g.mean_sq_diff(frozen_or_sg(z_v, freeze ? &freeze->z_v : nullptr), c_v_hat),
                                   betas.beta_v));
        if (betas.beta_commit > 0.0)
            loss = g.add(loss, g.scale(g.mean_sq_diff(z_v, frozen_or_sg(c_v_hat, freeze ? &freeze->c_v : nullptr)),
                                       betas.beta_commit));
    }
    return loss;
}

template <typename T>
struct SampleLoss {
    num::TensorId loss = -1;
    num::TensorId z_s = -1;            // flattened (W*N, C) skeletal window features
    num::TensorId z_v = -1;
    num::TensorId decoder_input = -1;  // straight-through node feeding the decoder
    num::TensorId recon = -1;          // reconstruction term alone
    std::vector<int> indices;          // assignments used this step
};

// Builds the full tokenizer training graph for one sequence. Assignments are
// recomputed from the current encoder outputs unless `frozen_indices` pins
// them; `freeze` additionally pins every stop-gradient branch (for FD checks).
template <typename T>
SampleLoss<T> build_sample_loss(Vgmt<T>& model, num::Graph<T>& g, const skeleton::PoseSequence& seq,
                                const RenderedSequence& rendered,
                                const std::vector<int>* frozen_indices = nullptr,
                                const VqFreeze<T>* freeze = nullptr) {
    model.check_input(seq);
    const VgmtConfig& cfg = model.config();
    const int n = model.layout().joint_count();
    const int w = seq.frames / cfg.downsample;
    const int cells = w * n;
    const int c = cfg.code_dim;

    SampleLoss<T> out;
    num::TensorId x = g.input({seq.frames, n, 3}, model.normalize(seq));

    num::TensorId z_s_flat = -1, z_v_flat = -1;
    if (cfg.mode != StreamMode::visual_only) {
        num::TensorId z_s = model.encode_skeleton_graph(g, x);
        z_s_flat = g.reshape(z_s, {cells, c});
    }
    if (cfg.mode != StreamMode::skeleton_only) {
        num::TensorId v = model.visual_features_graph(g, rendered);
        z_v_flat = g.reshape(model.encode_visual_graph(g, v), {cells, c});
    }

    if (frozen_indices) {
        if (static_cast<int>(frozen_indices->size()) != cells)
            throw DataError("vq loss: frozen assignment count mismatch");
        out.indices = *frozen_indices;
    } else {
        out.indices = model.quantize_cells(z_v_flat >= 0 ? &g.val(z_v_flat) : nullptr,
                                           z_s_flat >= 0 ? &g.val(z_s_flat) : nullptr, cells);
    }

    num::TensorId c_s_hat = -1, c_v_hat = -1;
    if (z_s_flat >= 0) c_s_hat = num::gather_rows(g, model.leaf(g, "codebook.skeletal"), out.indices);
    if (z_v_flat >= 0) c_v_hat = num::gather_rows(g, model.leaf(g, "codebook.visual"), out.indices);

    // Straight-through: forward carries the selected prototype, backward
    // copies the decoder-input gradient onto the encoder stream.
    num::TensorId st_src = cfg.mode == StreamMode::visual_only ? z_v_flat : z_s_flat;
    num::TensorId st_code = cfg.mode == StreamMode::visual_only ? c_v_hat : c_s_hat;
    num::TensorId st;
    if (freeze) {
        const std::vector<T>& z0 = cfg.mode == StreamMode::visual_only ? freeze->z_v : freeze->z_s;
        const std::vector<T>& c0 = cfg.mode == StreamMode::visual_only ? freeze->c_v : freeze->c_s;
        std::vector<T> delta(z0.size());
        for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = c0[i] - z0[i];
        st = g.add(st_src, g.input(g.shape(st_src), std::move(delta)));
    } else {
        st = g.add(st_src, g.stop_gradient(g.sub(st_code, st_src)));
    }
    num::TensorId x_hat = model.decode_graph(g, g.reshape(st, {w, n, c}));

    VqBetas betas{cfg.beta_s, cfg.beta_v, cfg.beta_commit};
    out.loss = vq_loss_terms(g, x, x_hat, z_v_flat, z_s_flat, c_v_hat, c_s_hat, betas, freeze);
    out.z_s = z_s_flat;
    out.z_v = z_v_flat;
    out.decoder_input = st;
    out.recon = g.mean_sq_diff(x_hat, x);
    return out;
}

// Captures the stop-gradient branch values for a frozen-assignment FD check.
template <typename T>
VqFreeze<T> capture_freeze(Vgmt<T>& model, const skeleton::PoseSequence& seq,
                           const RenderedSequence& rendered, std::vector<int>& indices_out) {
    num::Graph<T> g;
    SampleLoss<T> s = build_sample_loss(model, g, seq, rendered);
    indices_out = s.indices;
    VqFreeze<T> f;
    if (s.z_s >= 0) f.z_s = g.val(s.z_s);
    if (s.z_v >= 0) f.z_v = g.val(s.z_v);
    const VgmtConfig& cfg = model.config();
    auto gather = [&](const std::string& table) {
        const auto& t = model.params().at(table).value;
        std::vector<T> rows(s.indices.size() * static_cast<std::size_t>(cfg.code_dim));
        for (std::size_t i = 0; i < s.indices.size(); ++i)
            for (int c = 0; c < cfg.code_dim; ++c)
                rows[i * static_cast<std::size_t>(cfg.code_dim) + static_cast<std::size_t>(c)] =
                    t[static_cast<std::size_t>(s.indices[i]) * static_cast<std::size_t>(cfg.code_dim) +
                      static_cast<std::size_t>(c)];
        return rows;
    };
    if (s.z_s >= 0) f.c_s = gather("codebook.skeletal");
    if (s.z_v >= 0) f.c_v = gather("codebook.visual");
    return f;
}

}  // namespace motiontok::vgmt
