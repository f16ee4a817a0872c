#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <sstream>

#include "motiontok/numerics/grad_check.hpp"
#include "motiontok/skeleton/metrics.hpp"
#include "motiontok/skeleton/synth.hpp"
#include "motiontok/vgmt/codebook.hpp"
#include "motiontok/vgmt/loss.hpp"
#include "motiontok/vgmt/model.hpp"
#include "motiontok/vgmt/provider.hpp"
#include "motiontok/vgmt/train.hpp"

using namespace motiontok;
using namespace motiontok::vgmt;
using motiontok::num::Graph;
using motiontok::num::Shape;
using motiontok::num::TensorId;

namespace {

VgmtConfig tiny_config() {
    VgmtConfig cfg;
    cfg.codebook_size = 8;
    cfg.code_dim = 4;
    cfg.vsa_heads = 2;
    cfg.vsa_points = 2;
    cfg.stem_mid_channels = 3;
    cfg.provider.map_size = 6;
    return cfg;
}

skeleton::PoseSequence toy_sequence(int frames, std::uint64_t seed) {
    skeleton::SynthConfig sc;
    sc.frames = frames;
    return preprocess(skeleton::synth_motion(sc, seed), skeleton::CameraModel{});
}

HybridCodebook random_codebook(int k, int d, std::uint64_t seed) {
    Rng rng(seed);
    HybridCodebook cb(k, d);
    for (auto& v : cb.visual) v = static_cast<float>(rng.uniform(-1, 1));
    for (auto& v : cb.skeletal) v = static_cast<float>(rng.uniform(-1, 1));
    return cb;
}

}  // namespace

TEST_CASE("quantize: exact prototype match returns that code with distance 0") {
    HybridCodebook cb = random_codebook(8, 4, 1);
    std::vector<float> zv(cb.visual_row(3), cb.visual_row(3) + 4);
    std::vector<float> zs(cb.skeletal_row(3), cb.skeletal_row(3) + 4);
    auto r = quantize_cell(zv.data(), zs.data(), cb);
    REQUIRE(r.index == 3);
    REQUIRE(r.distance == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("quantize: the joint sum decides when the streams disagree") {
    HybridCodebook cb(2, 2);
    // Code 0 wins on the visual half, code 1 wins decisively on the skeletal.
    cb.visual = {0.0f, 0.0f, 0.4f, 0.0f};
    cb.skeletal = {5.0f, 5.0f, 0.0f, 0.0f};
    const std::vector<float> zv = {0.0f, 0.0f};
    const std::vector<float> zs = {0.0f, 0.0f};
    // visual d: code0 = 0, code1 = 0.16 ; skeletal d: code0 = 50, code1 = 0.
    auto fused = quantize_cell(zv.data(), zs.data(), cb);
    REQUIRE(fused.index == 1);
    auto visual_only = quantize_cell(zv.data(), nullptr, cb, StreamMode::visual_only);
    REQUIRE(visual_only.index == 0);
}

TEST_CASE("quantize: duplicate codes break ties toward the lowest index") {
    HybridCodebook cb = random_codebook(6, 3, 2);
    for (std::size_t c = 0; c < 3; ++c) {
        cb.visual[4 * 3 + c] = cb.visual[1 * 3 + c];
        cb.skeletal[4 * 3 + c] = cb.skeletal[1 * 3 + c];
    }
    std::vector<float> zv(cb.visual_row(1), cb.visual_row(1) + 3);
    std::vector<float> zs(cb.skeletal_row(1), cb.skeletal_row(1) + 3);
    REQUIRE(quantize_cell(zv.data(), zs.data(), cb).index == 1);
}

TEST_CASE("quantize equals an exhaustive scan on random inputs") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 2 + static_cast<int>(rng.below(62));
        const int d = 1 + static_cast<int>(rng.below(8));
        HybridCodebook cb = random_codebook(k, d, 1000 + static_cast<std::uint64_t>(trial));
        std::vector<float> zv(static_cast<std::size_t>(d)), zs(static_cast<std::size_t>(d));
        for (auto& v : zv) v = static_cast<float>(rng.uniform(-2, 2));
        for (auto& v : zs) v = static_cast<float>(rng.uniform(-2, 2));

        // Independent literal scan.
        int best = 0;
        double best_d = 1e300;
        for (int c = 0; c < k; ++c) {
            double dist = 0.0;
            for (int i = 0; i < d; ++i) {
                const double ev = static_cast<double>(zv[static_cast<std::size_t>(i)]) - cb.visual_row(c)[i];
                const double es = static_cast<double>(zs[static_cast<std::size_t>(i)]) - cb.skeletal_row(c)[i];
                dist += ev * ev + es * es;
            }
            if (dist < best_d) {
                best_d = dist;
                best = c;
            }
        }
        REQUIRE(quantize_cell(zv.data(), zs.data(), cb).index == best);
    }
}

TEST_CASE("encode_skeleton: 16 frames produce 8 windows; 4 frames produce 2") {
    Vgmt<float> model(tiny_config(), 7);
    for (int f : {16, 4}) {
        Graph<float> g;
        skeleton::PoseSequence seq = toy_sequence(f, 3);
        TensorId x = g.input({f, 17, 3}, model.normalize(seq));
        TensorId z = model.encode_skeleton_graph(g, x);
        REQUIRE(g.shape(z) == Shape{f / 2, 17, 4});
    }
}

TEST_CASE("encode_skeleton: all-zero weights give all-zero output") {
    Vgmt<float> model(tiny_config(), 7);
    for (auto& [name, p] : model.params().all())
        if (name.rfind("skel_enc.", 0) == 0) p.value.assign(p.value.size(), 0.0f);
    Graph<float> g;
    skeleton::PoseSequence seq = toy_sequence(4, 3);
    TensorId x = g.input({4, 17, 3}, model.normalize(seq));
    TensorId z = model.encode_skeleton_graph(g, x);
    for (float v : g.val(z)) REQUIRE(v == 0.0f);
}

TEST_CASE("vsa at zero-init equals the bilinear sample at the reference point") {
    Vgmt<float> model(tiny_config(), 11);
    Graph<float> g;
    Rng rng(5);
    const int s = 6, c = 4;
    std::vector<float> map_data(static_cast<std::size_t>(s * s * c));
    for (auto& v : map_data) v = static_cast<float>(rng.normal());
    TensorId map = g.input({s, s, c}, map_data);
    const std::vector<float> refs = {1.3f, 2.6f, 0.2f, 4.9f, 3.5f, 3.5f};
    TensorId refs_id = g.input({3, 2}, std::vector<float>(refs.begin(), refs.end()));
    TensorId query = num::bilinear_sample(g, map, refs_id);
    TensorId out = model.vsa_graph(g, query, map, refs);
    REQUIRE(g.shape(out) == Shape{3, 4});
    for (std::size_t i = 0; i < g.val(out).size(); ++i)
        REQUIRE(std::fabs(g.val(out)[i] - g.val(query)[i]) < 1e-6f);
}

TEST_CASE("vsa on a constant map is offset-invariant") {
    Vgmt<float> model(tiny_config(), 13);
    // Randomize offset/weight predictors; the constant map must hide them.
    Rng rng(6);
    for (const char* n : {"vsa.off.w", "vsa.off.b", "vsa.wt.w", "vsa.wt.b"}) {
        auto& p = model.params().at(n);
        for (auto& v : p.value) v = static_cast<float>(rng.uniform(-0.5, 0.5));
    }
    Graph<float> g;
    std::vector<float> flat(6 * 6 * 4, 1.25f);
    TensorId map = g.input({6, 6, 4}, flat);
    const std::vector<float> refs = {2.0f, 2.0f};
    TensorId query = num::bilinear_sample(g, map, g.input({1, 2}, std::vector<float>{2.0f, 2.0f}));
    TensorId out = model.vsa_graph(g, query, map, refs);
    // Same constant through the head-average projection: exactly the constant.
    for (float v : g.val(out)) REQUIRE(v == Catch::Approx(1.25f).margin(1e-5));
}

TEST_CASE("vsa matches a literal loop-over-heads-and-points reference") {
    VgmtConfig cfg = tiny_config();
    Vgmt<float> model(cfg, 17);
    Rng rng(8);
    for (const char* n : {"vsa.off.w", "vsa.off.b", "vsa.wt.w", "vsa.wt.b", "vsa.out.w", "vsa.out.b"}) {
        auto& p = model.params().at(n);
        for (auto& v : p.value) v = static_cast<float>(rng.uniform(-0.4, 0.4));
    }
    const int s = 6, c = cfg.code_dim, heads = cfg.vsa_heads, pts = cfg.vsa_points;
    std::vector<float> map_data(static_cast<std::size_t>(s * s * c));
    for (auto& v : map_data) v = static_cast<float>(rng.normal());
    const std::vector<float> refs = {1.7f, 2.3f, 3.1f, 0.8f};
    const int m = 2;

    Graph<float> g;
    TensorId map = g.input({s, s, c}, map_data);
    TensorId query = num::bilinear_sample(g, map, g.input({m, 2}, std::vector<float>(refs)));
    TensorId out = model.vsa_graph(g, query, map, refs);

    // Reference: plain scalar loops over heads and points.
    auto sample = [&](double x, double y, int ch) {
        x = std::clamp(x, 0.0, double(s - 1));
        y = std::clamp(y, 0.0, double(s - 1));
        int x0 = std::min(static_cast<int>(std::floor(x)), s - 2);
        int y0 = std::min(static_cast<int>(std::floor(y)), s - 2);
        const double fx = x - x0, fy = y - y0;
        auto at = [&](int yy, int xx) {
            return static_cast<double>(map_data[(static_cast<std::size_t>(yy) * s + static_cast<std::size_t>(xx)) * c +
                                                static_cast<std::size_t>(ch)]);
        };
        return (1 - fx) * (1 - fy) * at(y0, x0) + fx * (1 - fy) * at(y0, x0 + 1) + (1 - fx) * fy * at(y0 + 1, x0) +
               fx * fy * at(y0 + 1, x0 + 1);
    };
    const auto& offw = model.params().at("vsa.off.w").value;
    const auto& offb = model.params().at("vsa.off.b").value;
    const auto& wtw = model.params().at("vsa.wt.w").value;
    const auto& wtb = model.params().at("vsa.wt.b").value;
    const auto& outw = model.params().at("vsa.out.w").value;
    const auto& outb = model.params().at("vsa.out.b").value;
    const int hp = heads * pts;
    for (int i = 0; i < m; ++i) {
        std::vector<double> q(static_cast<std::size_t>(c));
        for (int ch = 0; ch < c; ++ch)
            q[static_cast<std::size_t>(ch)] =
                sample(refs[static_cast<std::size_t>(i) * 2], refs[static_cast<std::size_t>(i) * 2 + 1], ch);
        std::vector<double> concat;
        for (int h = 0; h < heads; ++h) {
            std::vector<double> logits(static_cast<std::size_t>(pts));
            for (int p = 0; p < pts; ++p) {
                const int col = h * pts + p;
                double acc = wtb[static_cast<std::size_t>(col)];
                for (int ch = 0; ch < c; ++ch)
                    acc += q[static_cast<std::size_t>(ch)] * wtw[static_cast<std::size_t>(ch) * static_cast<std::size_t>(hp) + static_cast<std::size_t>(col)];
                logits[static_cast<std::size_t>(p)] = acc;
            }
            double mx = logits[0];
            for (double l : logits) mx = std::max(mx, l);
            double sum = 0;
            for (auto& l : logits) {
                l = std::exp(l - mx);
                sum += l;
            }
            std::vector<double> head_acc(static_cast<std::size_t>(c), 0.0);
            for (int p = 0; p < pts; ++p) {
                const int col = h * pts + p;
                double ox = offb[static_cast<std::size_t>(col) * 2];
                double oy = offb[static_cast<std::size_t>(col) * 2 + 1];
                for (int ch = 0; ch < c; ++ch) {
                    ox += q[static_cast<std::size_t>(ch)] * offw[static_cast<std::size_t>(ch) * static_cast<std::size_t>(hp * 2) + static_cast<std::size_t>(col) * 2];
                    oy += q[static_cast<std::size_t>(ch)] * offw[static_cast<std::size_t>(ch) * static_cast<std::size_t>(hp * 2) + static_cast<std::size_t>(col) * 2 + 1];
                }
                const double wgt = logits[static_cast<std::size_t>(p)] / sum;
                for (int ch = 0; ch < c; ++ch)
                    head_acc[static_cast<std::size_t>(ch)] +=
                        wgt * sample(refs[static_cast<std::size_t>(i) * 2] + ox,
                                     refs[static_cast<std::size_t>(i) * 2 + 1] + oy, ch);
            }
            concat.insert(concat.end(), head_acc.begin(), head_acc.end());
        }
        for (int ch = 0; ch < c; ++ch) {
            double acc = outb[static_cast<std::size_t>(ch)];
            for (int j = 0; j < heads * c; ++j)
                acc += concat[static_cast<std::size_t>(j)] * outw[static_cast<std::size_t>(j) * static_cast<std::size_t>(c) + static_cast<std::size_t>(ch)];
            REQUIRE(std::fabs(acc - g.val(out)[static_cast<std::size_t>(i) * static_cast<std::size_t>(c) + static_cast<std::size_t>(ch)]) < 1e-5);
        }
    }
}

TEST_CASE("visual path: 16 frames produce 8 windows; batched equals per-joint") {
    VgmtConfig cfg = tiny_config();
    Vgmt<float> model(cfg, 19);
    Rng rng(9);
    for (const char* n : {"vsa.off.w", "vsa.wt.w"}) {
        auto& p = model.params().at(n);
        for (auto& v : p.value) v = static_cast<float>(rng.uniform(-0.2, 0.2));
    }
    skeleton::PoseSequence seq = toy_sequence(16, 21);
    RenderedSequence rendered = render_joints(seq, cfg.provider);
    Graph<float> g;
    TensorId v = model.visual_features_graph(g, rendered);
    REQUIRE(g.shape(v) == Shape{16, 17, cfg.code_dim});
    TensorId zv = model.encode_visual_graph(g, v);
    REQUIRE(g.shape(zv) == Shape{8, 17, cfg.code_dim});

    // Joint-by-joint pipeline on frame 0 must agree with the batched rows.
    Graph<float> g2;
    TensorId map = model.stem_graph(g2, rendered.raw, 0);
    for (int j = 0; j < 17; ++j) {
        const std::vector<float> ref = {rendered.ref_points[static_cast<std::size_t>(j) * 2],
                                        rendered.ref_points[static_cast<std::size_t>(j) * 2 + 1]};
        TensorId q = num::bilinear_sample(g2, map, g2.input({1, 2}, std::vector<float>(ref)));
        TensorId one = model.vsa_graph(g2, q, map, ref);
        for (int ch = 0; ch < cfg.code_dim; ++ch)
            REQUIRE(std::fabs(g2.val(one)[static_cast<std::size_t>(ch)] -
                              g.val(v)[static_cast<std::size_t>(j) * static_cast<std::size_t>(cfg.code_dim) +
                                       static_cast<std::size_t>(ch)]) < 1e-5f);
    }

    RenderedSequence bad = rendered;
    bad.ref_points.pop_back();
    bad.ref_points.pop_back();
    Graph<float> g3;
    REQUIRE_THROWS_AS(model.visual_features_graph(g3, bad), DataError);
}

TEST_CASE("decode: token grids map back to (F, N, 3) sequences") {
    VgmtConfig cfg = tiny_config();
    Vgmt<float> model(cfg, 23);
    TokenGrid grid(8, 17, skeleton::h36m17());
    Rng rng(10);
    for (auto& k : grid.indices) k = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.codebook_size)));
    skeleton::PoseSequence out = model.decode(grid);
    REQUIRE(out.frames == 16);
    REQUIRE(out.joints == 17);
    REQUIRE(out.space == skeleton::CoordinateSpace::pixel_rootrel);

    TokenGrid bad = grid;
    bad.indices[5] = cfg.codebook_size;
    REQUIRE_THROWS_AS(model.decode(bad), DataError);
}

TEST_CASE("vq_loss: zero when reconstruction is exact and features equal codes") {
    Graph<double> g;
    std::vector<double> xv = {0.5, -1.0, 2.0};
    TensorId x = g.input({3}, xv);
    TensorId x_hat = g.input({3}, xv);
    std::vector<double> zv = {1.0, 2.0};
    TensorId z = g.input({2}, zv);
    TensorId ch = g.input({2}, zv);
    TensorId loss = vq_loss_terms(g, x, x_hat, z, z, ch, ch, VqBetas{0.5, 0.5, 0.25});
    REQUIRE(g.scalar(loss) == Catch::Approx(0.0).margin(1e-12));

    REQUIRE_THROWS_AS(vq_loss_terms(g, x, x_hat, z, z, ch, ch, VqBetas{-0.1, 0.5, 0.0}), ConfigError);
}

TEST_CASE("vq loss gradients pass finite differences with frozen assignments") {
    VgmtConfig cfg = tiny_config();
    cfg.provider.map_size = 5;
    Vgmt<double> model(cfg, 31);
    // Weight-predictor off zero so the aggregation path carries gradient. The
    // offset predictor keeps zero weights (its gradient still flows through
    // the sample coordinates) and gets bias offsets placed so that no sample
    // lands within an FD step of a bilinear cell boundary, where the
    // coordinate derivative legitimately jumps.
    Rng rng(11);
    {
        auto& p = model.params().at("vsa.wt.w");
        for (auto& v : p.value) v = rng.uniform(-0.1, 0.1);
    }
    skeleton::PoseSequence seq = toy_sequence(2, 33);
    RenderedSequence rendered = render_joints(seq, cfg.provider);
    {
        auto& bias = model.params().at("vsa.off.b");
        for (std::size_t i = 0; i < bias.value.size(); ++i)
            bias.value[i] = 0.21 + 0.07 * static_cast<double>(i % 5);
        auto clear_of_boundaries = [&] {
            for (std::size_t r = 0; r < rendered.ref_points.size() / 2; ++r)
                for (std::size_t col = 0; col < bias.value.size() / 2; ++col)
                    for (int axis = 0; axis < 2; ++axis) {
                        const double c = static_cast<double>(rendered.ref_points[r * 2 + static_cast<std::size_t>(axis)]) +
                                         bias.value[col * 2 + static_cast<std::size_t>(axis)];
                        if (std::fabs(c - std::round(c)) < 5e-3) return false;
                    }
            return true;
        };
        while (!clear_of_boundaries())
            for (auto& v : bias.value) v += 0.0137;
    }

    // Freeze assignments and all stop-gradient branches: FD must evaluate the
    // same estimator the analytic gradient defines.
    std::vector<int> frozen;
    VqFreeze<double> freeze = capture_freeze(model, seq, rendered, frozen);
    auto build = [&](Graph<double>& g, num::ParamStore<double>&) {
        SampleLoss<double> s = build_sample_loss(model, g, seq, rendered, &frozen, &freeze);
        return s.loss;
    };
    auto report = num::grad_check<double>(build, model.params(), 1e-3, 1e-3, 6);
    INFO(report.worst_param << " rel " << report.max_rel_err);
    REQUIRE(report.pass);
}

TEST_CASE("codebook entries receive gradient only from the commitment terms") {
    VgmtConfig cfg = tiny_config();
    skeleton::PoseSequence seq = toy_sequence(2, 41);

    auto codebook_grad_norm = [&](double beta_s, double beta_v, double beta_commit) {
        VgmtConfig c2 = cfg;
        c2.beta_s = beta_s;
        c2.beta_v = beta_v;
        c2.beta_commit = beta_commit;
        Vgmt<float> model(c2, 43);
        RenderedSequence rendered = render_joints(seq, c2.provider);
        Graph<float> g;
        model.params().zero_grad();
        SampleLoss<float> s = build_sample_loss(model, g, seq, rendered);
        g.backward(s.loss);
        double norm = 0.0;
        for (const char* n : {"codebook.skeletal", "codebook.visual"})
            for (float v : model.params().at(n).grad) norm += std::fabs(static_cast<double>(v));
        return norm;
    };

    // With every beta zero the reconstruction term alone leaves the codebook
    // untouched (straight-through bypasses the quantizer).
    REQUIRE(codebook_grad_norm(0.0, 0.0, 0.0) == 0.0);
    REQUIRE(codebook_grad_norm(0.5, 0.5, 0.25) > 0.0);
}

TEST_CASE("straight-through: recon gradient at z_s equals decoder-input gradient") {
    VgmtConfig cfg = tiny_config();
    Vgmt<float> model(cfg, 47);
    skeleton::PoseSequence seq = toy_sequence(2, 49);
    RenderedSequence rendered = render_joints(seq, cfg.provider);
    Graph<float> g;
    model.params().zero_grad();
    SampleLoss<float> s = build_sample_loss(model, g, seq, rendered);
    g.backward(s.recon);
    REQUIRE(g.grad(s.z_s) == g.grad(s.decoder_input));
}

TEST_CASE("with beta_commit = 0 the visual stream receives exactly zero gradient") {
    VgmtConfig cfg = tiny_config();
    cfg.beta_commit = 0.0;
    Vgmt<float> model(cfg, 53);
    skeleton::PoseSequence seq = toy_sequence(2, 55);
    RenderedSequence rendered = render_joints(seq, cfg.provider);
    Graph<float> g;
    model.params().zero_grad();
    SampleLoss<float> s = build_sample_loss(model, g, seq, rendered);
    g.backward(s.loss);
    for (float v : g.grad(s.z_v)) REQUIRE(v == 0.0f);
    for (const char* n : {"provider.conv1.w", "provider.conv2.w", "vis_enc.res1.w", "vis_enc.down.w"})
        for (float v : model.params().at(n).grad) REQUIRE(v == 0.0f);
}

TEST_CASE("tokenize: 16x17 input gives an 8x17 grid of in-range indices, deterministically") {
    VgmtConfig cfg = tiny_config();
    Vgmt<float> model(cfg, 59);
    skeleton::PoseSequence seq = toy_sequence(16, 61);
    TokenGrid a = model.tokenize(seq);
    REQUIRE(a.windows == 8);
    REQUIRE(a.joints == 17);
    REQUIRE(a.indices.size() == 136);
    for (int k : a.indices) {
        REQUIRE(k >= 0);
        REQUIRE(k < cfg.codebook_size);
    }
    TokenGrid b = model.tokenize(seq);
    REQUIRE(a.indices == b.indices);

    skeleton::PoseSequence recon = model.decode(a);
    REQUIRE(recon.frames == seq.frames);
    REQUIRE(recon.frame_rate_hz == seq.frame_rate_hz);

    model.params().at("dec.up.w").value[0] = std::numeric_limits<float>::quiet_NaN();
    REQUIRE_THROWS_AS(model.tokenize(seq), NumericError);
}

TEST_CASE("single-stream modes tokenize and decode without the other stream") {
    skeleton::PoseSequence seq = toy_sequence(8, 63);
    for (StreamMode mode : {StreamMode::skeleton_only, StreamMode::visual_only}) {
        VgmtConfig cfg = tiny_config();
        cfg.mode = mode;
        Vgmt<float> model(cfg, 65);
        TokenGrid grid = model.tokenize(seq);
        REQUIRE(grid.windows == 4);
        skeleton::PoseSequence recon = model.decode(grid);
        REQUIRE(recon.frames == 8);
    }
}

TEST_CASE("train_tokenizer: deterministic per seed and rejects empty datasets") {
    VgmtConfig cfg = tiny_config();
    std::vector<skeleton::PoseSequence> data;
    for (std::uint64_t i = 0; i < 6; ++i) data.push_back(toy_sequence(8, 700 + i));

    TokenizerTrainConfig tc;
    tc.steps = 6;
    tc.batch_size = 2;
    tc.log_every = 3;
    tc.eval_sequences = 3;
    tc.seed = 5;

    Vgmt<float> m1(cfg, 71);
    auto r1 = train_tokenizer(m1, data, tc);
    Vgmt<float> m2(cfg, 71);
    auto r2 = train_tokenizer(m2, data, tc);
    REQUIRE(r1.final_loss == r2.final_loss);
    REQUIRE(r1.final_recon_mpjpe == r2.final_recon_mpjpe);

    Vgmt<float> m3(cfg, 71);
    std::vector<skeleton::PoseSequence> empty;
    REQUIRE_THROWS_AS(train_tokenizer(m3, empty, tc), DataError);
}

TEST_CASE("codebook export round-trips through hex JSON") {
    HybridCodebook cb = random_codebook(4, 3, 77);
    nlohmann::json j = codebook_to_json(cb);
    REQUIRE(j["codes"] == 4);
    REQUIRE(j["dim"] == 3);
    const std::string hex = j["visual"].get<std::string>();
    REQUIRE(hex.size() == cb.visual.size() * 8);
    // Decode the first float back.
    std::uint32_t bits = 0;
    for (int byte = 3; byte >= 0; --byte) {
        const auto hv = [&](char ch) { return ch <= '9' ? ch - '0' : ch - 'a' + 10; };
        bits = (bits << 8) | static_cast<std::uint32_t>((hv(hex[static_cast<std::size_t>(byte * 2)]) << 4) |
                                                        hv(hex[static_cast<std::size_t>(byte * 2 + 1)]));
    }
    float f;
    std::memcpy(&f, &bits, 4);
    REQUIRE(f == cb.visual[0]);
}
