#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "motiontok/numerics/graph.hpp"

namespace motiontok::num {

// 2D convolution over a (rows x cols x C_in) grid with odd kernels and
// 'same' zero padding. For pose encoders rows = frames and cols = joints.
template <typename T>
TensorId conv2d_grid(Graph<T>& g, TensorId x, TensorId w, TensorId b, int stride_r = 1, int stride_c = 1) {
    const Shape& sx = g.shape(x);
    const Shape& sw = g.shape(w);
    if (sx.size() != 3 || sw.size() != 4) throw NumericError("conv2d_grid: bad ranks");
    const int rows = sx[0], cols = sx[1], ci = sx[2];
    const int kr = sw[0], kc = sw[1];
    if (sw[2] != ci) throw NumericError("conv2d_grid: channel mismatch");
    const int co = sw[3];
    if (kr % 2 == 0 || kc % 2 == 0) throw NumericError("conv2d_grid: kernels must be odd");
    if (g.shape(b) != Shape{co}) throw NumericError("conv2d_grid: bias mismatch");
    const int pr = (kr - 1) / 2, pc = (kc - 1) / 2;
    const int orows = (rows + 2 * pr - kr) / stride_r + 1;
    const int ocols = (cols + 2 * pc - kc) / stride_c + 1;

    const auto& xv = g.val(x);
    const auto& wv = g.val(w);
    const auto& bv = g.val(b);
    auto xidx = [cols, ci](int r, int c, int ch) {
        return (static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)) *
                   static_cast<std::size_t>(ci) +
               static_cast<std::size_t>(ch);
    };
    auto widx = [kc, ci, co](int dr, int dc, int ic) {
        return ((static_cast<std::size_t>(dr) * static_cast<std::size_t>(kc) + static_cast<std::size_t>(dc)) *
                    static_cast<std::size_t>(ci) +
                static_cast<std::size_t>(ic)) *
               static_cast<std::size_t>(co);
    };

    std::vector<T> out(static_cast<std::size_t>(orows) * static_cast<std::size_t>(ocols) * static_cast<std::size_t>(co));
    std::size_t o = 0;
    for (int r = 0; r < orows; ++r) {
        for (int c = 0; c < ocols; ++c) {
            for (int oc = 0; oc < co; ++oc) out[o + static_cast<std::size_t>(oc)] = bv[static_cast<std::size_t>(oc)];
            for (int dr = 0; dr < kr; ++dr) {
                const int ir = r * stride_r + dr - pr;
                if (ir < 0 || ir >= rows) continue;
                for (int dc = 0; dc < kc; ++dc) {
                    const int icol = c * stride_c + dc - pc;
                    if (icol < 0 || icol >= cols) continue;
                    for (int ic = 0; ic < ci; ++ic) {
                        const T xvv = xv[xidx(ir, icol, ic)];
                        if (xvv == T(0)) continue;
                        const std::size_t w0 = widx(dr, dc, ic);
                        for (int oc = 0; oc < co; ++oc) out[o + static_cast<std::size_t>(oc)] += xvv * wv[w0 + static_cast<std::size_t>(oc)];
                    }
                }
            }
            o += static_cast<std::size_t>(co);
        }
    }

    const bool rg = g.requires_grad(x) || g.requires_grad(w) || g.requires_grad(b);
    TensorId id = g.custom({orows, ocols, co}, std::move(out), rg);
    if (rg) {
        g.set_back(id, [&g, id, x, w, b, rows, cols, ci, kr, kc, co, pr, pc, stride_r, stride_c, orows, ocols, xidx, widx] {
            const auto& gv = g.grad_ref(id);
            const auto& xv2 = g.val(x);
            const auto& wv2 = g.val(w);
            const bool gx = g.requires_grad(x), gw = g.requires_grad(w), gb = g.requires_grad(b);
            std::size_t o2 = 0;
            for (int r = 0; r < orows; ++r) {
                for (int c = 0; c < ocols; ++c) {
                    if (gb) {
                        auto& dbv = g.grad_ref(b);
                        for (int oc = 0; oc < co; ++oc) dbv[static_cast<std::size_t>(oc)] += gv[o2 + static_cast<std::size_t>(oc)];
                    }
                    for (int dr = 0; dr < kr; ++dr) {
                        const int ir = r * stride_r + dr - pr;
                        if (ir < 0 || ir >= rows) continue;
                        for (int dc = 0; dc < kc; ++dc) {
                            const int icol = c * stride_c + dc - pc;
                            if (icol < 0 || icol >= cols) continue;
                            for (int ic = 0; ic < ci; ++ic) {
                                const std::size_t xi = xidx(ir, icol, ic);
                                const std::size_t w0 = widx(dr, dc, ic);
                                if (gx) {
                                    T acc = T(0);
                                    for (int oc = 0; oc < co; ++oc)
                                        acc += gv[o2 + static_cast<std::size_t>(oc)] * wv2[w0 + static_cast<std::size_t>(oc)];
                                    g.grad_ref(x)[xi] += acc;
                                }
                                if (gw) {
                                    const T xvv = xv2[xi];
                                    if (xvv != T(0)) {
                                        auto& dwv = g.grad_ref(w);
                                        for (int oc = 0; oc < co; ++oc)
                                            dwv[w0 + static_cast<std::size_t>(oc)] += gv[o2 + static_cast<std::size_t>(oc)] * xvv;
                                    }
                                }
                            }
                        }
                    }
                    o2 += static_cast<std::size_t>(co);
                }
            }
        });
    }
    return id;
}

// Nearest-neighbor upsampling along the row (time) axis of (R, C, D).
template <typename T>
TensorId upsample_rows(Graph<T>& g, TensorId x, int factor) {
    const Shape& s = g.shape(x);
    if (s.size() != 3 || factor < 1) throw NumericError("upsample_rows: bad arguments");
    const int rows = s[0];
    const std::size_t rowlen = numel(s) / static_cast<std::size_t>(rows);
    std::vector<T> out(numel(s) * static_cast<std::size_t>(factor));
    for (int r = 0; r < rows; ++r)
        for (int f = 0; f < factor; ++f)
            std::copy(g.val(x).begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(r) * rowlen),
                      g.val(x).begin() + static_cast<std::ptrdiff_t>((static_cast<std::size_t>(r) + 1) * rowlen),
                      out.begin() + static_cast<std::ptrdiff_t>((static_cast<std::size_t>(r) * static_cast<std::size_t>(factor) +
                                                                 static_cast<std::size_t>(f)) *
                                                                rowlen));
    Shape os = s;
    os[0] = rows * factor;
    TensorId id = g.custom(std::move(os), std::move(out), g.requires_grad(x));
    if (g.requires_grad(id)) {
        g.set_back(id, [&g, id, x, rows, rowlen, factor] {
            const auto& gv = g.grad_ref(id);
            auto& gx = g.grad_ref(x);
            for (int r = 0; r < rows; ++r)
                for (int f = 0; f < factor; ++f)
                    for (std::size_t i = 0; i < rowlen; ++i)
                        gx[static_cast<std::size_t>(r) * rowlen + i] +=
                            gv[(static_cast<std::size_t>(r) * static_cast<std::size_t>(factor) + static_cast<std::size_t>(f)) *
                                   rowlen +
                               i];
        });
    }
    return id;
}

// Bilinear interpolation of a (H, W, C) map at continuous (x, y) points,
// border-clamped. Differentiable in both the map and the coordinates.
template <typename T>
TensorId bilinear_sample(Graph<T>& g, TensorId map, TensorId coords) {
    const Shape& sm = g.shape(map);
    const Shape& sc = g.shape(coords);
    if (sm.size() != 3) throw NumericError("bilinear_sample: map must be (H, W, C)");
    if (sc.empty() || sc.back() != 2) throw NumericError("bilinear_sample: coords must end in 2");
    const int h = sm[0], w = sm[1], c = sm[2];
    const int npts = static_cast<int>(numel(sc) / 2);

    struct Tap {
        int x0, y0;
        T fx, fy;
        bool dx_live, dy_live;
    };
    std::vector<Tap> taps(static_cast<std::size_t>(npts));
    const auto& cv = g.val(coords);
    for (int p = 0; p < npts; ++p) {
        T x = cv[static_cast<std::size_t>(p) * 2];
        T y = cv[static_cast<std::size_t>(p) * 2 + 1];
        Tap& t = taps[static_cast<std::size_t>(p)];
        t.dx_live = x > T(0) && x < T(w - 1);
        t.dy_live = y > T(0) && y < T(h - 1);
        x = std::clamp(x, T(0), T(w - 1));
        y = std::clamp(y, T(0), T(h - 1));
        t.x0 = std::min(static_cast<int>(std::floor(x)), w - 2);
        t.y0 = std::min(static_cast<int>(std::floor(y)), h - 2);
        if (w == 1) t.x0 = 0;
        if (h == 1) t.y0 = 0;
        t.fx = x - static_cast<T>(t.x0);
        t.fy = y - static_cast<T>(t.y0);
    }

    const auto& mv = g.val(map);
    auto midx = [w, c](int yy, int xx) {
        return (static_cast<std::size_t>(yy) * static_cast<std::size_t>(w) + static_cast<std::size_t>(xx)) *
               static_cast<std::size_t>(c);
    };
    std::vector<T> out(static_cast<std::size_t>(npts) * static_cast<std::size_t>(c));
    for (int p = 0; p < npts; ++p) {
        const Tap& t = taps[static_cast<std::size_t>(p)];
        const int x1 = std::min(t.x0 + 1, w - 1), y1 = std::min(t.y0 + 1, h - 1);
        const std::size_t i00 = midx(t.y0, t.x0), i10 = midx(t.y0, x1), i01 = midx(y1, t.x0), i11 = midx(y1, x1);
        const T w00 = (T(1) - t.fx) * (T(1) - t.fy), w10 = t.fx * (T(1) - t.fy);
        const T w01 = (T(1) - t.fx) * t.fy, w11 = t.fx * t.fy;
        for (int ch = 0; ch < c; ++ch)
            out[static_cast<std::size_t>(p) * static_cast<std::size_t>(c) + static_cast<std::size_t>(ch)] =
                w00 * mv[i00 + static_cast<std::size_t>(ch)] + w10 * mv[i10 + static_cast<std::size_t>(ch)] +
                w01 * mv[i01 + static_cast<std::size_t>(ch)] + w11 * mv[i11 + static_cast<std::size_t>(ch)];
    }

    Shape os(sc.begin(), sc.end() - 1);
    os.push_back(c);
    const bool rg = g.requires_grad(map) || g.requires_grad(coords);
    TensorId id = g.custom(std::move(os), std::move(out), rg);
    if (rg) {
        g.set_back(id, [&g, id, map, coords, taps, w, h, c, midx] {
            const auto& gv = g.grad_ref(id);
            const auto& mv2 = g.val(map);
            const bool gm = g.requires_grad(map), gc = g.requires_grad(coords);
            const int npts2 = static_cast<int>(taps.size());
            for (int p = 0; p < npts2; ++p) {
                const Tap& t = taps[static_cast<std::size_t>(p)];
                const int x1 = std::min(t.x0 + 1, w - 1), y1 = std::min(t.y0 + 1, h - 1);
                const std::size_t i00 = midx(t.y0, t.x0), i10 = midx(t.y0, x1), i01 = midx(y1, t.x0), i11 = midx(y1, x1);
                const T w00 = (T(1) - t.fx) * (T(1) - t.fy), w10 = t.fx * (T(1) - t.fy);
                const T w01 = (T(1) - t.fx) * t.fy, w11 = t.fx * t.fy;
                T dfx = T(0), dfy = T(0);
                for (int ch = 0; ch < c; ++ch) {
                    const T go = gv[static_cast<std::size_t>(p) * static_cast<std::size_t>(c) + static_cast<std::size_t>(ch)];
                    if (go == T(0)) continue;
                    const T v00 = mv2[i00 + static_cast<std::size_t>(ch)], v10 = mv2[i10 + static_cast<std::size_t>(ch)];
                    const T v01 = mv2[i01 + static_cast<std::size_t>(ch)], v11 = mv2[i11 + static_cast<std::size_t>(ch)];
                    if (gm) {
                        auto& gmv = g.grad_ref(map);
                        gmv[i00 + static_cast<std::size_t>(ch)] += go * w00;
                        gmv[i10 + static_cast<std::size_t>(ch)] += go * w10;
                        gmv[i01 + static_cast<std::size_t>(ch)] += go * w01;
                        gmv[i11 + static_cast<std::size_t>(ch)] += go * w11;
                    }
                    dfx += go * ((T(1) - t.fy) * (v10 - v00) + t.fy * (v11 - v01));
                    dfy += go * ((T(1) - t.fx) * (v01 - v00) + t.fx * (v11 - v10));
                }
                if (gc) {
                    auto& gcv = g.grad_ref(coords);
                    if (t.dx_live) gcv[static_cast<std::size_t>(p) * 2] += dfx;
                    if (t.dy_live) gcv[static_cast<std::size_t>(p) * 2 + 1] += dfy;
                }
            }
        });
    }
    return id;
}

// Row gather: out[i] = table[ids[i]]; backward scatter-adds into the table.
// Serves both token embeddings and codebook lookups.
template <typename T>
TensorId gather_rows(Graph<T>& g, TensorId table, std::vector<int> ids) {
    const Shape& st = g.shape(table);
    if (st.size() != 2) throw NumericError("gather_rows: table must be (V, D)");
    const int v = st[0], d = st[1];
    std::vector<T> out(ids.size() * static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || ids[i] >= v) throw NumericError("gather_rows: index out of range");
        std::copy(g.val(table).begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(ids[i]) * static_cast<std::size_t>(d)),
                  g.val(table).begin() + static_cast<std::ptrdiff_t>((static_cast<std::size_t>(ids[i]) + 1) * static_cast<std::size_t>(d)),
                  out.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(d)));
    }
    TensorId id = g.custom({static_cast<int>(ids.size()), d}, std::move(out), g.requires_grad(table));
    if (g.requires_grad(id)) {
        g.set_back(id, [&g, id, table, ids = std::move(ids), d] {
            const auto& gv = g.grad_ref(id);
            auto& gt = g.grad_ref(table);
            for (std::size_t i = 0; i < ids.size(); ++i)
                for (int j = 0; j < d; ++j)
                    gt[static_cast<std::size_t>(ids[i]) * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)] +=
                        gv[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)];
        });
    }
    return id;
}

// Per-row layer normalization with learned gain/shift over the trailing dim.
template <typename T>
TensorId layer_norm(Graph<T>& g, TensorId x, TensorId gamma, TensorId beta, double eps = 1e-5) {
    const Shape& sx = g.shape(x);
    const int c = sx.back();
    if (g.shape(gamma) != Shape{c} || g.shape(beta) != Shape{c}) throw NumericError("layer_norm: gain/shift mismatch");
    const std::size_t rows = numel(sx) / static_cast<std::size_t>(c);
    const auto& xv = g.val(x);
    const auto& gv0 = g.val(gamma);
    const auto& bv0 = g.val(beta);
    std::vector<T> out(xv.size());
    std::vector<T> inv_std(rows), xhat(xv.size());
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t off = r * static_cast<std::size_t>(c);
        T mu = T(0);
        for (int j = 0; j < c; ++j) mu += xv[off + static_cast<std::size_t>(j)];
        mu /= static_cast<T>(c);
        T var = T(0);
        for (int j = 0; j < c; ++j) {
            const T d = xv[off + static_cast<std::size_t>(j)] - mu;
            var += d * d;
        }
        var /= static_cast<T>(c);
        const T is = T(1) / std::sqrt(var + static_cast<T>(eps));
        inv_std[r] = is;
        for (int j = 0; j < c; ++j) {
            const T xh = (xv[off + static_cast<std::size_t>(j)] - mu) * is;
            xhat[off + static_cast<std::size_t>(j)] = xh;
            out[off + static_cast<std::size_t>(j)] = gv0[static_cast<std::size_t>(j)] * xh + bv0[static_cast<std::size_t>(j)];
        }
    }
    const bool rg = g.requires_grad(x) || g.requires_grad(gamma) || g.requires_grad(beta);
    TensorId id = g.custom(sx, std::move(out), rg);
    if (rg) {
        g.set_back(id, [&g, id, x, gamma, beta, rows, c, inv_std = std::move(inv_std), xhat = std::move(xhat)] {
            const auto& go = g.grad_ref(id);
            const auto& gam = g.val(gamma);
            const bool gx = g.requires_grad(x), gg = g.requires_grad(gamma), gb = g.requires_grad(beta);
            for (std::size_t r = 0; r < rows; ++r) {
                const std::size_t off = r * static_cast<std::size_t>(c);
                if (gg || gb) {
                    for (int j = 0; j < c; ++j) {
                        if (gg) g.grad_ref(gamma)[static_cast<std::size_t>(j)] += go[off + static_cast<std::size_t>(j)] * xhat[off + static_cast<std::size_t>(j)];
                        if (gb) g.grad_ref(beta)[static_cast<std::size_t>(j)] += go[off + static_cast<std::size_t>(j)];
                    }
                }
                if (gx) {
                    T mean_gy = T(0), mean_gy_xhat = T(0);
                    for (int j = 0; j < c; ++j) {
                        const T gy = go[off + static_cast<std::size_t>(j)] * gam[static_cast<std::size_t>(j)];
                        mean_gy += gy;
                        mean_gy_xhat += gy * xhat[off + static_cast<std::size_t>(j)];
                    }
                    mean_gy /= static_cast<T>(c);
                    mean_gy_xhat /= static_cast<T>(c);
                    auto& gxv = g.grad_ref(x);
                    for (int j = 0; j < c; ++j) {
                        const T gy = go[off + static_cast<std::size_t>(j)] * gam[static_cast<std::size_t>(j)];
                        gxv[off + static_cast<std::size_t>(j)] +=
                            inv_std[r] * (gy - mean_gy - xhat[off + static_cast<std::size_t>(j)] * mean_gy_xhat);
                    }
                }
            }
        });
    }
    return id;
}

// Mean cross-entropy over masked positions of (T, V) logits. Fused
// log-softmax keeps it numerically stable.
template <typename T>
TensorId cross_entropy_masked(Graph<T>& g, TensorId logits, const std::vector<int>& targets,
                              const std::vector<bool>& mask) {
    const Shape& s = g.shape(logits);
    if (s.size() != 2) throw NumericError("cross_entropy_masked: logits must be (T, V)");
    const int t = s[0], v = s[1];
    if (static_cast<int>(targets.size()) != t || static_cast<int>(mask.size()) != t)
        throw NumericError("cross_entropy_masked: target/mask length mismatch");
    int m = 0;
    for (bool b : mask) m += b ? 1 : 0;
    if (m == 0) throw DataError("cross_entropy_masked: empty loss mask");

    const auto& lv = g.val(logits);
    T loss = T(0);
    std::vector<T> row_max(static_cast<std::size_t>(t)), row_lse(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i) {
        if (!mask[static_cast<std::size_t>(i)]) continue;
        if (targets[static_cast<std::size_t>(i)] < 0 || targets[static_cast<std::size_t>(i)] >= v)
            throw NumericError("cross_entropy_masked: target out of range");
        const std::size_t off = static_cast<std::size_t>(i) * static_cast<std::size_t>(v);
        T mx = lv[off];
        for (int j = 1; j < v; ++j) mx = std::max(mx, lv[off + static_cast<std::size_t>(j)]);
        T se = T(0);
        for (int j = 0; j < v; ++j) se += std::exp(lv[off + static_cast<std::size_t>(j)] - mx);
        const T lse = mx + std::log(se);
        row_max[static_cast<std::size_t>(i)] = mx;
        row_lse[static_cast<std::size_t>(i)] = lse;
        loss += lse - lv[off + static_cast<std::size_t>(targets[static_cast<std::size_t>(i)])];
    }
    loss /= static_cast<T>(m);

    TensorId id = g.custom({1}, {loss}, g.requires_grad(logits));
    if (g.requires_grad(id)) {
        g.set_back(id, [&g, id, logits, targets, mask, t, v, m, row_lse = std::move(row_lse)] {
            const T go = g.grad_ref(id)[0];
            const auto& lv2 = g.val(logits);
            auto& gl = g.grad_ref(logits);
            const T c = go / static_cast<T>(m);
            for (int i = 0; i < t; ++i) {
                if (!mask[static_cast<std::size_t>(i)]) continue;
                const std::size_t off = static_cast<std::size_t>(i) * static_cast<std::size_t>(v);
                for (int j = 0; j < v; ++j)
                    gl[off + static_cast<std::size_t>(j)] +=
                        c * std::exp(lv2[off + static_cast<std::size_t>(j)] - row_lse[static_cast<std::size_t>(i)]);
                gl[off + static_cast<std::size_t>(targets[static_cast<std::size_t>(i)])] -= c;
            }
        });
    }
    return id;
}

// x (R, K) . w (K, N) + b: the dense layer used everywhere.
template <typename T>
TensorId dense(Graph<T>& g, TensorId x, TensorId w, TensorId b) {
    return g.add_bias(g.matmul(x, w), b);
}

// Average-pools an (S, S, C) map into (P, P, C) patches; S must divide by P.
template <typename T>
TensorId avg_pool_patches(Graph<T>& g, TensorId map, int patches) {
    const Shape& s = g.shape(map);
    if (s.size() != 3 || s[0] != s[1]) throw NumericError("avg_pool_patches: map must be square (S, S, C)");
    const int size = s[0], c = s[2];
    if (patches < 1 || size % patches != 0) throw NumericError("avg_pool_patches: patch grid must divide the map");
    const int block = size / patches;
    const T inv = T(1) / static_cast<T>(block * block);
    const auto& mv = g.val(map);
    auto midx = [size, c](int y, int x) {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(size) + static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(c);
    };
    std::vector<T> out(static_cast<std::size_t>(patches) * static_cast<std::size_t>(patches) * static_cast<std::size_t>(c), T(0));
    for (int py = 0; py < patches; ++py)
        for (int px = 0; px < patches; ++px) {
            const std::size_t oo = (static_cast<std::size_t>(py) * static_cast<std::size_t>(patches) + static_cast<std::size_t>(px)) *
                                   static_cast<std::size_t>(c);
            for (int y = py * block; y < (py + 1) * block; ++y)
                for (int x = px * block; x < (px + 1) * block; ++x)
                    for (int ch = 0; ch < c; ++ch)
                        out[oo + static_cast<std::size_t>(ch)] += inv * mv[midx(y, x) + static_cast<std::size_t>(ch)];
        }
    TensorId id = g.custom({patches, patches, c}, std::move(out), g.requires_grad(map));
    if (g.requires_grad(id)) {
        g.set_back(id, [&g, id, map, patches, block, c, size, inv, midx] {
            const auto& gv = g.grad_ref(id);
            auto& gm = g.grad_ref(map);
            for (int py = 0; py < patches; ++py)
                for (int px = 0; px < patches; ++px) {
                    const std::size_t oo = (static_cast<std::size_t>(py) * static_cast<std::size_t>(patches) +
                                            static_cast<std::size_t>(px)) *
                                           static_cast<std::size_t>(c);
                    for (int y = py * block; y < (py + 1) * block; ++y)
                        for (int x = px * block; x < (px + 1) * block; ++x)
                            for (int ch = 0; ch < c; ++ch)
                                gm[midx(y, x) + static_cast<std::size_t>(ch)] += inv * gv[oo + static_cast<std::size_t>(ch)];
                }
        });
    }
    return id;
}

// Weighted sum over sampling points: samples (M, H, P, C) x weights (M, H, P)
// -> (M, H, C). The aggregation step of deformable attention.
template <typename T>
TensorId weighted_point_sum(Graph<T>& g, TensorId samples, TensorId weights) {
    const Shape& ss = g.shape(samples);
    const Shape& sw = g.shape(weights);
    if (ss.size() != 4 || sw.size() != 3 || ss[0] != sw[0] || ss[1] != sw[1] || ss[2] != sw[2])
        throw NumericError("weighted_point_sum: bad shapes");
    const int m = ss[0], h = ss[1], p = ss[2], c = ss[3];
    const auto& sv = g.val(samples);
    const auto& wv = g.val(weights);
    std::vector<T> out(static_cast<std::size_t>(m) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c), T(0));
    for (int i = 0; i < m * h; ++i) {
        const std::size_t so = static_cast<std::size_t>(i) * static_cast<std::size_t>(p) * static_cast<std::size_t>(c);
        const std::size_t wo = static_cast<std::size_t>(i) * static_cast<std::size_t>(p);
        const std::size_t oo = static_cast<std::size_t>(i) * static_cast<std::size_t>(c);
        for (int k = 0; k < p; ++k) {
            const T wk = wv[wo + static_cast<std::size_t>(k)];
            for (int ch = 0; ch < c; ++ch)
                out[oo + static_cast<std::size_t>(ch)] += wk * sv[so + static_cast<std::size_t>(k) * static_cast<std::size_t>(c) + static_cast<std::size_t>(ch)];
        }
    }
    const bool rg = g.requires_grad(samples) || g.requires_grad(weights);
    TensorId id = g.custom({m, h, c}, std::move(out), rg);
    if (rg) {
        g.set_back(id, [&g, id, samples, weights, m, h, p, c] {
            const auto& go = g.grad_ref(id);
            const auto& sv2 = g.val(samples);
            const auto& wv2 = g.val(weights);
            const bool gs = g.requires_grad(samples), gw = g.requires_grad(weights);
            for (int i = 0; i < m * h; ++i) {
                const std::size_t so = static_cast<std::size_t>(i) * static_cast<std::size_t>(p) * static_cast<std::size_t>(c);
                const std::size_t wo = static_cast<std::size_t>(i) * static_cast<std::size_t>(p);
                const std::size_t oo = static_cast<std::size_t>(i) * static_cast<std::size_t>(c);
                for (int k = 0; k < p; ++k) {
                    T dw = T(0);
                    for (int ch = 0; ch < c; ++ch) {
                        const T gv = go[oo + static_cast<std::size_t>(ch)];
                        const std::size_t si = so + static_cast<std::size_t>(k) * static_cast<std::size_t>(c) + static_cast<std::size_t>(ch);
                        if (gs) g.grad_ref(samples)[si] += gv * wv2[wo + static_cast<std::size_t>(k)];
                        dw += gv * sv2[si];
                    }
                    if (gw) g.grad_ref(weights)[wo + static_cast<std::size_t>(k)] += dw;
                }
            }
        });
    }
    return id;
}

}  // namespace motiontok::num
