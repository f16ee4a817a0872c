#pragma once

#include <string>
#include <vector>

#include "motiontok/common.hpp"
#include "motiontok/numerics/graph.hpp"
#include "motiontok/numerics/nn.hpp"
#include "motiontok/numerics/params.hpp"

namespace motiontok::num {

// Deformable attention around per-row reference points: per head, offsets and
// softmax aggregation weights are predicted from the query; the map is
// bilinearly sampled at ref + offset; heads are concatenated and projected
// back to the channel dimension.
//
// Parameter names under `prefix`: .off.w/.off.b (C -> H*P*2, zero-init),
// .wt.w/.wt.b (C -> H*P, zero-init), .out.w/.out.b (H*C -> C, head-average
// init). Zero-initialized predictors make the block an exact bilinear sample
// at the reference point.
template <typename T>
void create_deformable_params(ParamStore<T>& store, const std::string& prefix, int channels, int heads,
                              int points) {
    const int hp = heads * points;
    init_zeros(store.create(prefix + ".off.w", {channels, hp * 2}));
    init_zeros(store.create(prefix + ".off.b", {hp * 2}));
    init_zeros(store.create(prefix + ".wt.w", {channels, hp}));
    init_zeros(store.create(prefix + ".wt.b", {hp}));
    init_head_average(store.create(prefix + ".out.w", {heads * channels, channels}), heads, channels);
    init_zeros(store.create(prefix + ".out.b", {channels}));
}

template <typename T>
TensorId deformable_attention(Graph<T>& g, ParamStore<T>& store, const std::string& prefix, TensorId query,
                              TensorId map, const std::vector<float>& refs, int heads, int points, int channels) {
    const int m = g.shape(query)[0];
    const int hp = heads * points;
    if (static_cast<int>(refs.size()) != m * 2) throw DataError("deformable attention: reference point count mismatch");

    TensorId off = dense(g, query, store.leaf(g, prefix + ".off.w"), store.leaf(g, prefix + ".off.b"));
    off = g.reshape(off, {m * hp, 2});
    std::vector<T> rep(static_cast<std::size_t>(m) * static_cast<std::size_t>(hp) * 2);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < hp; ++k) {
            rep[(static_cast<std::size_t>(i) * static_cast<std::size_t>(hp) + static_cast<std::size_t>(k)) * 2] =
                static_cast<T>(refs[static_cast<std::size_t>(i) * 2]);
            rep[(static_cast<std::size_t>(i) * static_cast<std::size_t>(hp) + static_cast<std::size_t>(k)) * 2 + 1] =
                static_cast<T>(refs[static_cast<std::size_t>(i) * 2 + 1]);
        }
    TensorId coords = g.add(off, g.input({m * hp, 2}, std::move(rep)));
    TensorId samples = bilinear_sample(g, map, coords);
    samples = g.reshape(samples, {m, heads, points, channels});

    TensorId wts = dense(g, query, store.leaf(g, prefix + ".wt.w"), store.leaf(g, prefix + ".wt.b"));
    wts = g.softmax_rows(g.reshape(wts, {m, heads, points}), points);

    TensorId agg = weighted_point_sum(g, samples, wts);
    agg = g.reshape(agg, {m, heads * channels});
    return dense(g, agg, store.leaf(g, prefix + ".out.w"), store.leaf(g, prefix + ".out.b"));
}

}  // namespace motiontok::num
