#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "motiontok/common.hpp"

namespace motiontok::num {

using TensorId = std::int32_t;
using Shape = std::vector<int>;

inline std::size_t numel(const Shape& s) {
    std::size_t n = 1;
    for (int d : s) n *= static_cast<std::size_t>(d);
    return n;
}

// Dynamic reverse-mode tape over dense row-major tensors. One Graph instance
// is one forward/backward episode; parameters live outside in a ParamStore
// and enter through param() leaves. Single-threaded per instance.
template <typename T>
class Graph {
public:
    struct Node {
        Shape shape;
        std::vector<T> val;
        std::vector<T> grad;
        bool rg = false;
        std::function<void()> back;
    };

    // ---- leaves ----

    TensorId input(Shape shape, std::vector<T> data) {
        if (data.size() != numel(shape)) throw NumericError("graph: input data/shape mismatch");
        return push(std::move(shape), std::move(data), false);
    }

    TensorId zeros(Shape shape, bool rg = false) {
        std::vector<T> v(numel(shape), T(0));
        return push(std::move(shape), std::move(v), rg);
    }

    // Leaf view of an external parameter. `value` is copied in; on backward
    // the node gradient is accumulated into `grad_out`.
    TensorId param(const Shape& shape, const std::vector<T>& value, std::vector<T>* grad_out) {
        if (value.size() != numel(shape)) throw NumericError("graph: param data/shape mismatch");
        TensorId id = push(shape, value, true);
        nodes_[static_cast<std::size_t>(id)].back = [this, id, grad_out] {
            const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
            for (std::size_t i = 0; i < g.size(); ++i) (*grad_out)[i] += g[i];
        };
        return id;
    }

    // ---- structure ----

    const Shape& shape(TensorId id) const { return nodes_[static_cast<std::size_t>(id)].shape; }
    const std::vector<T>& val(TensorId id) const { return nodes_[static_cast<std::size_t>(id)].val; }
    std::vector<T>& mutable_val(TensorId id) { return nodes_[static_cast<std::size_t>(id)].val; }
    const std::vector<T>& grad(TensorId id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
    bool requires_grad(TensorId id) const { return nodes_[static_cast<std::size_t>(id)].rg; }
    std::size_t node_count() const { return nodes_.size(); }

    T scalar(TensorId id) const {
        if (numel(shape(id)) != 1) throw NumericError("graph: scalar() on non-scalar node");
        return val(id)[0];
    }

    // ---- elementwise ----

    TensorId add(TensorId a, TensorId b) {
        check_same_shape(a, b, "add");
        std::vector<T> out(val(a).size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = val(a)[i] + val(b)[i];
        TensorId id = push(shape(a), std::move(out), requires_grad(a) || requires_grad(b));
        if (requires_grad(id)) {
            nodes_[static_cast<std::size_t>(id)].back = [this, id, a, b] {
                const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
                if (requires_grad(a)) {
                    auto& ga = grad_ref(a);
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                }
                if (requires_grad(b)) {
                    auto& gb = grad_ref(b);
                    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
                }
            };
        }
        return id;
    }

    TensorId sub(TensorId a, TensorId b) {
        check_same_shape(a, b, "sub");
        std::vector<T> out(val(a).size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = val(a)[i] - val(b)[i];
        TensorId id = push(shape(a), std::move(out), requires_grad(a) || requires_grad(b));
        if (requires_grad(id)) {
            nodes_[static_cast<std::size_t>(id)].back = [this, id, a, b] {
                const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
                if (requires_grad(a)) {
                    auto& ga = grad_ref(a);
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                }
                if (requires_grad(b)) {
                    auto& gb = grad_ref(b);
                    for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
                }
            };
        }
        return id;
    }

    TensorId mul(TensorId a, TensorId b) {
        check_same_shape(a, b, "mul");
        std::vector<T> out(val(a).size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = val(a)[i] * val(b)[i];
        TensorId id = push(shape(a), std::move(out), requires_grad(a) || requires_grad(b));
        if (requires_grad(id)) {
            nodes_[static_cast<std::size_t>(id)].back = [this, id, a, b] {
                const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
                if (requires_grad(a)) {
                    auto& ga = grad_ref(a);
                    const auto& bv = val(b);
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
                }
                if (requires_grad(b)) {
                    auto& gb = grad_ref(b);
                    const auto& av = val(a);
                    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
                }
            };
        }
        return id;
    }

    TensorId scale(TensorId a, double c) {
        std::vector<T> out(val(a).size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<T>(c) * val(a)[i];
        TensorId id = push(shape(a), std::move(out), requires_grad(a));
        if (requires_grad(id)) {
            nodes_[static_cast<std::size_t>(id)].back = [this, id, a, c] {
                const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
                auto& ga = grad_ref(a);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += static_cast<T>(c) * g[i];
            };
        }
        return id;
    }

    TensorId relu(TensorId a) {
        std::vector<T> out(val(a).size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = val(a)[i] > T(0) ? val(a)[i] : T(0);
        TensorId id = push(shape(a), std::move(out), requires_grad(a));
        if (requires_grad(id)) {
            nodes_[static_cast<std::size_t>(id)].back = [this, id, a] {
                const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
                const auto& av = val(a);
                auto& ga = grad_ref(a);
                for (std::size_t i = 0; i < g.size(); ++i)
                    if (av[i] > T(0)) ga[i] += g[i];
            };
        }
        return id;
    }

    TensorId gelu(TensorId a) {
        // tanh approximation of GELU.
        const T k0 = static_cast<T>(0.7978845608028654);
        const T k1 = static_cast<T>(0.044715);
        std::vector<T> out(val(a).size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            const T x = val(a)[i];
            out[i] = T(0.5) * x * (T(1) + std::tanh(k0 * (x + k1 * x * x * x)));
        }
        TensorId id = push(shape(a), std::move(out), requires_grad(a));
        if (requires_grad(id)) {
            nodes_[static_cast<std::size_t>(id)].back = [this, id, a, k0, k1] {
                const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
                const auto& av = val(a);
                auto& ga = grad_ref(a);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    const T x = av[i];
                    const T u = k0 * (x + k1 * x * x * x);
                    const T th = std::tanh(u);
                    const T du = k0 * (T(1) + T(3) * k1 * x * x);
                    ga[i] += g[i] * (T(0.5) * (T(1) + th) + T(0.5) * x * (T(1) - th * th) * du);
                }
            };
        }
        return id;
    }

    // Broadcast-add a length-C bias over the trailing dimension.
    TensorId add_bias(TensorId a, TensorId b) {
        const Shape& sa = shape(a);
        const int c = sa.back();
        if (shape(b) != Shape{c}) throw NumericError("add_bias: bias must match trailing dim");
        const std::size_t rows = numel(sa) / static_cast<std::size_t>(c);
        std::vector<T> out(val(a).size());
        for (std::size_t r = 0; r < rows; ++r)
            for (int j = 0; j < c; ++j)
                out[r * static_cast<std::size_t>(c) + static_cast<std::size_t>(j)] =
                    val(a)[r * static_cast<std::size_t>(c) + static_cast<std::size_t>(j)] + val(b)[static_cast<std::size_t>(j)];
        TensorId id = push(sa, std::move(out), requires_grad(a) || requires_grad(b));
        if (requires_grad(id)) {
            nodes_[static_cast<std::size_t>(id)].back = [this, id, a, b, rows, c] {
                const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
                if (requires_grad(a)) {
                    auto& ga = grad_ref(a);
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                }
                if (requires_grad(b)) {
                    auto& gb = grad_ref(b);
                    for (std::size_t r = 0; r < rows; ++r)
                        for (int j = 0; j < c; ++j)
                            gb[static_cast<std::size_t>(j)] += g[r * static_cast<std::size_t>(c) + static_cast<std::size_t>(j)];
                }
            };
        }
        return id;
    }

    // ---- reductions ----

    TensorId sum_all(TensorId a) {
        T s = T(0);
        for (T v : val(a)) s += v;
        TensorId id = push({1}, {s}, requires_grad(a));
        if (requires_grad(id)) {
            nodes_[static_cast<std::size_t>(id)].back = [this, id, a] {
                const T g = nodes_[static_cast<std::size_t>(id)].grad[0];
                auto& ga = grad_ref(a);
                for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
            };
        }
        return id;
    }

    TensorId mean_all(TensorId a) { return scale(sum_all(a), 1.0 / static_cast<double>(val(a).size())); }

    // mean((a - b)^2), fused.
    TensorId mean_sq_diff(TensorId a, TensorId b) {
        check_same_shape(a, b, "mean_sq_diff");
        const std::size_t n = val(a).size();
        T s = T(0);
        for (std::size_t i = 0; i < n; ++i) {
            const T d = val(a)[i] - val(b)[i];
            s += d * d;
        }
        TensorId id = push({1}, {s / static_cast<T>(n)}, requires_grad(a) || requires_grad(b));
        if (requires_grad(id)) {
            nodes_[static_cast<std::size_t>(id)].back = [this, id, a, b, n] {
                const T g = nodes_[static_cast<std::size_t>(id)].grad[0];
                const T c = T(2) * g / static_cast<T>(n);
                const auto& av = val(a);
                const auto& bv = val(b);
                if (requires_grad(a)) {
                    auto& ga = grad_ref(a);
                    for (std::size_t i = 0; i < n; ++i) ga[i] += c * (av[i] - bv[i]);
                }
                if (requires_grad(b)) {
                    auto& gb = grad_ref(b);
                    for (std::size_t i = 0; i < n; ++i) gb[i] -= c * (av[i] - bv[i]);
                }
            };
        }
        return id;
    }

    // ---- matrix products ----

    TensorId matmul(TensorId a, TensorId b) {
        const Shape& sa = shape(a);
        const Shape& sb = shape(b);
        if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0]) throw NumericError("matmul: bad shapes");
        const int m = sa[0], k = sa[1], n = sb[1];
        std::vector<T> out(static_cast<std::size_t>(m) * static_cast<std::size_t>(n), T(0));
        mm(val(a).data(), val(b).data(), out.data(), m, k, n);
        TensorId id = push({m, n}, std::move(out), requires_grad(a) || requires_grad(b));
        if (requires_grad(id)) {
            nodes_[static_cast<std::size_t>(id)].back = [this, id, a, b, m, k, n] {
                const T* g = nodes_[static_cast<std::size_t>(id)].grad.data();
                if (requires_grad(a)) mm_nt(g, val(b).data(), grad_ref(a).data(), m, n, k);
                if (requires_grad(b)) mm_tn(val(a).data(), g, grad_ref(b).data(), k, m, n);
            };
        }
        return id;
    }

    TensorId bmm(TensorId a, TensorId b) {
        const Shape& sa = shape(a);
        const Shape& sb = shape(b);
        if (sa.size() != 3 || sb.size() != 3 || sa[0] != sb[0] || sa[2] != sb[1]) throw NumericError("bmm: bad shapes");
        const int bs = sa[0], m = sa[1], k = sa[2], n = sb[2];
        std::vector<T> out(static_cast<std::size_t>(bs) * static_cast<std::size_t>(m) * static_cast<std::size_t>(n), T(0));
        for (int i = 0; i < bs; ++i)
            mm(val(a).data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(m * k),
               val(b).data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(k * n),
               out.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(m * n), m, k, n);
        TensorId id = push({bs, m, n}, std::move(out), requires_grad(a) || requires_grad(b));
        if (requires_grad(id)) {
            nodes_[static_cast<std::size_t>(id)].back = [this, id, a, b, bs, m, k, n] {
                const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
                for (int i = 0; i < bs; ++i) {
                    const T* gi = g.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(m * n);
                    if (requires_grad(a))
                        mm_nt(gi, val(b).data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(k * n),
                              grad_ref(a).data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(m * k), m, n, k);
                    if (requires_grad(b))
                        mm_tn(val(a).data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(m * k), gi,
                              grad_ref(b).data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(k * n), k, m, n);
                }
            };
        }
        return id;
    }

    // a (B,M,K) x b (B,N,K)^T -> (B,M,N); the q.k^T of attention without a
    // materialized transpose.
    TensorId bmm_nt(TensorId a, TensorId b) {
        const Shape& sa = shape(a);
        const Shape& sb = shape(b);
        if (sa.size() != 3 || sb.size() != 3 || sa[0] != sb[0] || sa[2] != sb[2]) throw NumericError("bmm_nt: bad shapes");
        const int bs = sa[0], m = sa[1], k = sa[2], n = sb[1];
        std::vector<T> out(static_cast<std::size_t>(bs) * static_cast<std::size_t>(m) * static_cast<std::size_t>(n), T(0));
        for (int i = 0; i < bs; ++i)
            mm_nt(val(a).data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(m * k),
                  val(b).data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(n * k),
                  out.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(m * n), m, k, n);
        TensorId id = push({bs, m, n}, std::move(out), requires_grad(a) || requires_grad(b));
        if (requires_grad(id)) {
            nodes_[static_cast<std::size_t>(id)].back = [this, id, a, b, bs, m, k, n] {
                const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
                for (int i = 0; i < bs; ++i) {
                    const T* gi = g.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(m * n);
                    // dA = G.B ; dB = G^T.A
                    if (requires_grad(a))
                        mm(gi, val(b).data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(n * k),
                           grad_ref(a).data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(m * k), m, n, k);
                    if (requires_grad(b))
                        mm_tn(gi, val(a).data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(m * k),
                              grad_ref(b).data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(n * k), n, m, k);
                }
            };
        }
        return id;
    }

    // ---- softmax family ----

    // Softmax over contiguous trailing chunks of length `row_len`.
    TensorId softmax_rows(TensorId a, int row_len) {
        const std::size_t n = val(a).size();
        if (row_len <= 0 || n % static_cast<std::size_t>(row_len) != 0) throw NumericError("softmax_rows: bad row length");
        const std::size_t rows = n / static_cast<std::size_t>(row_len);
        std::vector<T> out(n);
        for (std::size_t r = 0; r < rows; ++r) {
            const T* x = val(a).data() + r * static_cast<std::size_t>(row_len);
            T* y = out.data() + r * static_cast<std::size_t>(row_len);
            T mx = x[0];
            for (int j = 1; j < row_len; ++j) mx = std::max(mx, x[j]);
            T s = T(0);
            for (int j = 0; j < row_len; ++j) {
                y[j] = std::exp(x[j] - mx);
                s += y[j];
            }
            for (int j = 0; j < row_len; ++j) y[j] /= s;
        }
        TensorId id = push(shape(a), std::move(out), requires_grad(a));
        if (requires_grad(id)) {
            nodes_[static_cast<std::size_t>(id)].back = [this, id, a, rows, row_len] {
                const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
                const auto& y = val(id);
                auto& ga = grad_ref(a);
                for (std::size_t r = 0; r < rows; ++r) {
                    const std::size_t off = r * static_cast<std::size_t>(row_len);
                    T dot = T(0);
                    for (int j = 0; j < row_len; ++j) dot += g[off + static_cast<std::size_t>(j)] * y[off + static_cast<std::size_t>(j)];
                    for (int j = 0; j < row_len; ++j)
                        ga[off + static_cast<std::size_t>(j)] +=
                            y[off + static_cast<std::size_t>(j)] * (g[off + static_cast<std::size_t>(j)] - dot);
                }
            };
        }
        return id;
    }

    // Sets entries above the diagonal to a large negative constant; the usual
    // pre-softmax causal mask for (B, T, T) score tensors.
    TensorId causal_mask(TensorId a) {
        const Shape& s = shape(a);
        if (s.size() != 3 || s[1] != s[2]) throw NumericError("causal_mask: expects (B, T, T)");
        const int bs = s[0], t = s[1];
        std::vector<T> out(val(a));
        for (int b = 0; b < bs; ++b)
            for (int i = 0; i < t; ++i)
                for (int j = i + 1; j < t; ++j)
                    out[(static_cast<std::size_t>(b) * static_cast<std::size_t>(t) + static_cast<std::size_t>(i)) *
                            static_cast<std::size_t>(t) +
                        static_cast<std::size_t>(j)] = static_cast<T>(-1e30);
        TensorId id = push(s, std::move(out), requires_grad(a));
        if (requires_grad(id)) {
            nodes_[static_cast<std::size_t>(id)].back = [this, id, a, bs, t] {
                const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
                auto& ga = grad_ref(a);
                for (int b = 0; b < bs; ++b)
                    for (int i = 0; i < t; ++i)
                        for (int j = 0; j <= i; ++j) {
                            const std::size_t k = (static_cast<std::size_t>(b) * static_cast<std::size_t>(t) +
                                                   static_cast<std::size_t>(i)) *
                                                      static_cast<std::size_t>(t) +
                                                  static_cast<std::size_t>(j);
                            ga[k] += g[k];
                        }
            };
        }
        return id;
    }

    // ---- shape plumbing ----

    TensorId reshape(TensorId a, Shape new_shape) {
        if (numel(new_shape) != val(a).size()) throw NumericError("reshape: element count mismatch");
        TensorId id = push(std::move(new_shape), val(a), requires_grad(a));
        if (requires_grad(id)) {
            nodes_[static_cast<std::size_t>(id)].back = [this, id, a] {
                const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
                auto& ga = grad_ref(a);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
            };
        }
        return id;
    }

    // (A, B, C) -> (B, A, C); enough permutation power for head splitting.
    TensorId permute102(TensorId t) {
        const Shape& s = shape(t);
        if (s.size() != 3) throw NumericError("permute102: expects rank 3");
        const int a = s[0], b = s[1], c = s[2];
        std::vector<T> out(val(t).size());
        for (int i = 0; i < a; ++i)
            for (int j = 0; j < b; ++j)
                for (int k = 0; k < c; ++k)
                    out[(static_cast<std::size_t>(j) * static_cast<std::size_t>(a) + static_cast<std::size_t>(i)) *
                            static_cast<std::size_t>(c) +
                        static_cast<std::size_t>(k)] =
                        val(t)[(static_cast<std::size_t>(i) * static_cast<std::size_t>(b) + static_cast<std::size_t>(j)) *
                                   static_cast<std::size_t>(c) +
                               static_cast<std::size_t>(k)];
        TensorId id = push({b, a, c}, std::move(out), requires_grad(t));
        if (requires_grad(id)) {
            nodes_[static_cast<std::size_t>(id)].back = [this, id, t, a, b, c] {
                const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
                auto& gt = grad_ref(t);
                for (int i = 0; i < a; ++i)
                    for (int j = 0; j < b; ++j)
                        for (int k = 0; k < c; ++k)
                            gt[(static_cast<std::size_t>(i) * static_cast<std::size_t>(b) + static_cast<std::size_t>(j)) *
                                   static_cast<std::size_t>(c) +
                               static_cast<std::size_t>(k)] +=
                                g[(static_cast<std::size_t>(j) * static_cast<std::size_t>(a) + static_cast<std::size_t>(i)) *
                                      static_cast<std::size_t>(c) +
                                  static_cast<std::size_t>(k)];
            };
        }
        return id;
    }

    TensorId concat_rows(const std::vector<TensorId>& parts) {
        if (parts.empty()) throw NumericError("concat_rows: empty");
        Shape tail(shape(parts[0]).begin() + 1, shape(parts[0]).end());
        int rows = 0;
        for (TensorId p : parts) {
            Shape t2(shape(p).begin() + 1, shape(p).end());
            if (t2 != tail) throw NumericError("concat_rows: trailing dims differ");
            rows += shape(p)[0];
        }
        Shape out_shape;
        out_shape.push_back(rows);
        out_shape.insert(out_shape.end(), tail.begin(), tail.end());
        std::vector<T> out;
        out.reserve(numel(out_shape));
        bool rg = false;
        for (TensorId p : parts) {
            out.insert(out.end(), val(p).begin(), val(p).end());
            rg = rg || requires_grad(p);
        }
        TensorId id = push(std::move(out_shape), std::move(out), rg);
        if (requires_grad(id)) {
            std::vector<TensorId> ps = parts;
            nodes_[static_cast<std::size_t>(id)].back = [this, id, ps] {
                const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
                std::size_t off = 0;
                for (TensorId p : ps) {
                    const std::size_t n = val(p).size();
                    if (requires_grad(p)) {
                        auto& gp = grad_ref(p);
                        for (std::size_t i = 0; i < n; ++i) gp[i] += g[off + i];
                    }
                    off += n;
                }
            };
        }
        return id;
    }

    TensorId slice_rows(TensorId a, int begin, int end) {
        const Shape& s = shape(a);
        if (begin < 0 || end > s[0] || begin >= end) throw NumericError("slice_rows: bad range");
        const std::size_t row = numel(s) / static_cast<std::size_t>(s[0]);
        Shape out_shape = s;
        out_shape[0] = end - begin;
        std::vector<T> out(val(a).begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(begin) * row),
                           val(a).begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(end) * row));
        TensorId id = push(std::move(out_shape), std::move(out), requires_grad(a));
        if (requires_grad(id)) {
            nodes_[static_cast<std::size_t>(id)].back = [this, id, a, begin, row] {
                const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
                auto& ga = grad_ref(a);
                const std::size_t off = static_cast<std::size_t>(begin) * row;
                for (std::size_t i = 0; i < g.size(); ++i) ga[off + i] += g[i];
            };
        }
        return id;
    }

    // Forward identity that contributes no gradient to its input.
    TensorId stop_gradient(TensorId a) { return push(shape(a), val(a), false); }

    // ---- backward ----

    void backward(TensorId loss) {
        if (numel(shape(loss)) != 1) throw NumericError("backward: loss must be scalar");
        for (auto& n : nodes_) {
            if (n.rg) n.grad.assign(n.val.size(), T(0));
        }
        nodes_[static_cast<std::size_t>(loss)].grad.assign(1, T(1));
        for (std::size_t i = nodes_.size(); i-- > 0;) {
            if (nodes_[i].rg && nodes_[i].back) nodes_[i].back();
        }
    }

    // Escape hatch for fused ops defined outside this class: create the node
    // first, then bind a backward closure that captures its id.
    TensorId custom(Shape shape, std::vector<T> value, bool rg) {
        return push(std::move(shape), std::move(value), rg);
    }

    void set_back(TensorId id, std::function<void()> back) {
        nodes_[static_cast<std::size_t>(id)].back = std::move(back);
    }

    std::vector<T>& grad_ref(TensorId id) { return nodes_[static_cast<std::size_t>(id)].grad; }

private:
    TensorId push(Shape shape, std::vector<T> value, bool rg) {
        Node n;
        n.shape = std::move(shape);
        n.val = std::move(value);
        n.rg = rg;
        nodes_.push_back(std::move(n));
        return static_cast<TensorId>(nodes_.size() - 1);
    }

    void check_same_shape(TensorId a, TensorId b, const char* op) const {
        if (shape(a) != shape(b)) throw NumericError(std::string(op) + ": shape mismatch");
    }

    // C += A.B with C zero-initialized by callers where appropriate; here the
    // forward paths pass freshly zeroed buffers and backward paths accumulate.
    static void mm(const T* a, const T* b, T* c, int m, int k, int n) {
        for (int i = 0; i < m; ++i) {
            const T* ai = a + static_cast<std::size_t>(i) * static_cast<std::size_t>(k);
            T* ci = c + static_cast<std::size_t>(i) * static_cast<std::size_t>(n);
            for (int p = 0; p < k; ++p) {
                const T av = ai[p];
                if (av == T(0)) continue;
                const T* bp = b + static_cast<std::size_t>(p) * static_cast<std::size_t>(n);
                for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
            }
        }
    }

    // C += A.B^T  (A: m x k, B: n x k, C: m x n)
    static void mm_nt(const T* a, const T* b, T* c, int m, int k, int n) {
        for (int i = 0; i < m; ++i) {
            const T* ai = a + static_cast<std::size_t>(i) * static_cast<std::size_t>(k);
            T* ci = c + static_cast<std::size_t>(i) * static_cast<std::size_t>(n);
            for (int j = 0; j < n; ++j) {
                const T* bj = b + static_cast<std::size_t>(j) * static_cast<std::size_t>(k);
                T acc = T(0);
                for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
                ci[j] += acc;
            }
        }
    }

    // C += A^T.B  (A: m x k viewed transposed -> k x m ... concretely:
    // a is (rows x k) laid out row-major, result is (k x n), b is (rows x n))
    static void mm_tn(const T* a, const T* b, T* c, int k, int rows, int n) {
        for (int r = 0; r < rows; ++r) {
            const T* ar = a + static_cast<std::size_t>(r) * static_cast<std::size_t>(k);
            const T* br = b + static_cast<std::size_t>(r) * static_cast<std::size_t>(n);
            for (int p = 0; p < k; ++p) {
                const T av = ar[p];
                if (av == T(0)) continue;
                T* cp = c + static_cast<std::size_t>(p) * static_cast<std::size_t>(n);
                for (int j = 0; j < n; ++j) cp[j] += av * br[j];
            }
        }
    }

    std::vector<Node> nodes_;
};

}  // namespace motiontok::num
