#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "motiontok/numerics/checkpoint.hpp"
#include "motiontok/numerics/feature_map.hpp"
#include "motiontok/numerics/grad_check.hpp"
#include "motiontok/numerics/graph.hpp"
#include "motiontok/numerics/nn.hpp"
#include "motiontok/numerics/params.hpp"

using namespace motiontok;
using namespace motiontok::num;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

}  // namespace

TEST_CASE("bilinear_sample is exact on grid nodes and constant maps") {
    Graph<double> g;
    const int h = 4, w = 5, c = 3;
    TensorId map = g.input({h, w, c}, random_vec(static_cast<std::size_t>(h * w * c), 1));
    TensorId pts = g.input({2, 2}, {2.0, 3.0, 0.0, 0.0});
    TensorId out = bilinear_sample(g, map, pts);
    for (int ch = 0; ch < c; ++ch) {
        REQUIRE(g.val(out)[static_cast<std::size_t>(ch)] ==
                Catch::Approx(g.val(map)[(3 * 5 + 2) * 3 + static_cast<std::size_t>(ch)]));
        REQUIRE(g.val(out)[static_cast<std::size_t>(3 + ch)] == Catch::Approx(g.val(map)[static_cast<std::size_t>(ch)]));
    }

    Graph<double> g2;
    std::vector<double> flat(static_cast<std::size_t>(h * w * c), 0.75);
    TensorId cmap = g2.input({h, w, c}, flat);
    TensorId anywhere = g2.input({3, 2}, {0.3, 1.7, 4.0, 3.0, -9.0, 99.0});
    TensorId o2 = bilinear_sample(g2, cmap, anywhere);
    for (double v : g2.val(o2)) REQUIRE(v == Catch::Approx(0.75));
}

TEST_CASE("bilinear_sample matches the hand-computed 4-tap sum at (1.3, 2.7)") {
    Graph<double> g;
    const int h = 5, w = 4, c = 2;
    auto data = random_vec(static_cast<std::size_t>(h * w * c), 9);
    TensorId map = g.input({h, w, c}, data);
    TensorId pts = g.input({1, 2}, {1.3, 2.7});
    TensorId out = bilinear_sample(g, map, pts);
    auto at = [&](int y, int x, int ch) { return data[(static_cast<std::size_t>(y) * 4 + static_cast<std::size_t>(x)) * 2 + static_cast<std::size_t>(ch)]; };
    for (int ch = 0; ch < c; ++ch) {
        const double expected = 0.7 * 0.3 * at(2, 1, ch) + 0.3 * 0.3 * at(2, 2, ch) +
                                0.7 * 0.7 * at(3, 1, ch) + 0.3 * 0.7 * at(3, 2, ch);
        REQUIRE(std::fabs(g.val(out)[static_cast<std::size_t>(ch)] - expected) < 1e-6);
    }
}

TEST_CASE("bilinear_sample clamps out-of-bounds coordinates to the border") {
    Graph<double> g;
    auto data = random_vec(4 * 4 * 1, 3);
    TensorId map = g.input({4, 4, 1}, data);
    TensorId pts = g.input({2, 2}, {-3.0, -1.0, 10.0, 20.0});
    TensorId out = bilinear_sample(g, map, pts);
    REQUIRE(g.val(out)[0] == Catch::Approx(data[0]));
    REQUIRE(g.val(out)[1] == Catch::Approx(data[15]));
}

TEST_CASE("stop_gradient: identity forward, zero gradient backward") {
    Graph<double> g;
    ParamStore<double> store;
    auto& px = store.create("x", {3});
    px.value = {1.0, -2.0, 0.5};
    TensorId x = store.leaf(g, "x");
    TensorId sg = g.stop_gradient(x);
    REQUIRE(g.val(sg) == g.val(x));

    // Loss built only on sg(x): x receives exactly zero gradient.
    TensorId loss = g.sum_all(g.mul(sg, sg));
    g.backward(loss);
    for (double v : px.grad) REQUIRE(v == 0.0);
}

TEST_CASE("d/dx of sg(x)*x equals x, confirmed by a frozen-branch finite difference") {
    ParamStore<double> store;
    auto& px = store.create("x", {3});
    px.value = {1.5, -0.25, 2.0};

    // Analytic gradient through the real composite.
    {
        Graph<double> g;
        TensorId x = store.leaf(g, "x");
        TensorId loss = g.sum_all(g.mul(g.stop_gradient(x), x));
        g.backward(loss);
        for (std::size_t i = 0; i < 3; ++i) REQUIRE(px.grad[i] == Catch::Approx(px.value[i]));
    }

    // FD on the equivalent function with the sg branch frozen at x0.
    const std::vector<double> frozen = px.value;
    auto build = [&](Graph<double>& g, ParamStore<double>& s) {
        TensorId x = s.leaf(g, "x");
        TensorId c = g.input({3}, frozen);
        return g.sum_all(g.mul(c, x));
    };
    auto report = grad_check<double>(build, store, 1e-4, 1e-6);
    REQUIRE(report.pass);
}

TEST_CASE("grad_check: f(x) = x^2 at 3 gives 6 within 1e-6 relative") {
    ParamStore<double> store;
    store.create("x", {1}).value = {3.0};
    auto build = [](Graph<double>& g, ParamStore<double>& s) {
        TensorId x = s.leaf(g, "x");
        return g.sum_all(g.mul(x, x));
    };
    auto report = grad_check<double>(build, store, 1e-4, 1e-6);
    REQUIRE(report.pass);
    REQUIRE(store.at("x").grad[0] == Catch::Approx(6.0));
}

TEST_CASE("gradients: dense + gelu + layer_norm chain passes finite differences") {
    ParamStore<double> store;
    Rng rng(5);
    auto& w = store.create("w", {4, 3});
    init_uniform_fanin(w, 4, rng);
    auto& b = store.create("b", {3});
    init_uniform_fanin(b, 4, rng);
    auto& gam = store.create("gamma", {3});
    init_constant(gam, 1.0);
    auto& bet = store.create("beta", {3});
    init_zeros(bet);

    const auto xdata = random_vec(2 * 4, 6);
    auto build = [&](Graph<double>& g, ParamStore<double>& s) {
        TensorId x = g.input({2, 4}, xdata);
        TensorId h = dense(g, x, s.leaf(g, "w"), s.leaf(g, "b"));
        h = g.gelu(h);
        h = layer_norm(g, h, s.leaf(g, "gamma"), s.leaf(g, "beta"));
        return g.mean_sq_diff(h, g.zeros({2, 3}));
    };
    auto report = grad_check<double>(build, store, 1e-3, 1e-3);
    INFO(report.worst_param << " rel " << report.max_rel_err);
    REQUIRE(report.pass);
}

TEST_CASE("gradients: conv2d_grid stride 1 and stride 2 pass finite differences") {
    for (int stride : {1, 2}) {
        ParamStore<double> store;
        Rng rng(7);
        auto& w = store.create("w", {3, 3, 2, 4});
        init_uniform_fanin(w, 3 * 3 * 2, rng);
        auto& b = store.create("b", {4});
        init_uniform_fanin(b, 18, rng);
        auto& x = store.create("x", {4, 5, 2});
        init_normal(x, 0.5, rng);

        auto build = [&, stride](Graph<double>& g, ParamStore<double>& s) {
            TensorId out = conv2d_grid(g, s.leaf(g, "x"), s.leaf(g, "w"), s.leaf(g, "b"), stride, 1);
            return g.mean_sq_diff(out, g.zeros(g.shape(out)));
        };
        auto report = grad_check<double>(build, store, 1e-3, 1e-3);
        INFO("stride " << stride << " worst " << report.worst_param << " rel " << report.max_rel_err);
        REQUIRE(report.pass);
    }
}

TEST_CASE("conv2d_grid shapes: stride 2 halves the frame axis") {
    Graph<double> g;
    TensorId x = g.input({16, 17, 2}, random_vec(16 * 17 * 2, 8));
    TensorId w = g.input({3, 3, 2, 5}, random_vec(3 * 3 * 2 * 5, 9));
    TensorId b = g.input({5}, random_vec(5, 10));
    TensorId out = conv2d_grid(g, x, w, b, 2, 1);
    REQUIRE(g.shape(out) == Shape{8, 17, 5});
}

TEST_CASE("gradients: softmax attention composite passes finite differences") {
    // One-head causal attention assembled from primitives.
    ParamStore<double> store;
    Rng rng(11);
    const int t = 4, d = 6;
    for (const char* n : {"wq", "wk", "wv"}) {
        auto& w = store.create(n, {d, d});
        init_uniform_fanin(w, d, rng);
    }
    const auto xdata = random_vec(static_cast<std::size_t>(t * d), 12);
    auto build = [&](Graph<double>& g, ParamStore<double>& s) {
        TensorId x = g.input({t, d}, xdata);
        TensorId q = g.reshape(g.matmul(x, s.leaf(g, "wq")), {1, t, d});
        TensorId k = g.reshape(g.matmul(x, s.leaf(g, "wk")), {1, t, d});
        TensorId v = g.reshape(g.matmul(x, s.leaf(g, "wv")), {1, t, d});
        TensorId scores = g.scale(g.bmm_nt(q, k), 1.0 / std::sqrt(static_cast<double>(d)));
        TensorId attn = g.softmax_rows(g.causal_mask(scores), t);
        TensorId out = g.bmm(attn, v);
        return g.mean_sq_diff(out, g.zeros({1, t, d}));
    };
    auto report = grad_check<double>(build, store, 1e-3, 1e-3);
    INFO(report.worst_param << " rel " << report.max_rel_err);
    REQUIRE(report.pass);
}

TEST_CASE("gradients: bilinear sampling wrt map and coordinates") {
    ParamStore<double> store;
    Rng rng(13);
    auto& map = store.create("map", {5, 6, 3});
    init_normal(map, 1.0, rng);
    auto& pts = store.create("pts", {4, 2});
    pts.value = {1.3, 2.7, 0.4, 0.9, 3.6, 1.1, 2.2, 3.3};  // interior points

    auto build = [&](Graph<double>& g, ParamStore<double>& s) {
        TensorId out = bilinear_sample(g, s.leaf(g, "map"), s.leaf(g, "pts"));
        return g.mean_sq_diff(out, g.zeros(g.shape(out)));
    };
    auto report = grad_check<double>(build, store, 1e-4, 1e-3);
    INFO(report.worst_param << " rel " << report.max_rel_err);
    REQUIRE(report.pass);
}

TEST_CASE("gradients: gather_rows and cross_entropy_masked pass finite differences") {
    ParamStore<double> store;
    Rng rng(17);
    auto& table = store.create("table", {6, 4});
    init_normal(table, 0.7, rng);
    auto& w = store.create("w", {4, 5});
    init_uniform_fanin(w, 4, rng);
    auto& b = store.create("b", {5});
    init_zeros(b);

    const std::vector<int> ids = {0, 3, 5, 3};
    const std::vector<int> targets = {1, 4, 0, 2};
    const std::vector<bool> mask = {true, false, true, true};
    auto build = [&](Graph<double>& g, ParamStore<double>& s) {
        TensorId e = gather_rows(g, s.leaf(g, "table"), ids);
        TensorId logits = dense(g, e, s.leaf(g, "w"), s.leaf(g, "b"));
        return cross_entropy_masked(g, logits, targets, mask);
    };
    auto report = grad_check<double>(build, store, 1e-3, 1e-3);
    INFO(report.worst_param << " rel " << report.max_rel_err);
    REQUIRE(report.pass);
}

TEST_CASE("cross_entropy_masked: uniform logits give ln(V); empty mask throws") {
    Graph<double> g;
    const int t = 3, v = 7;
    TensorId logits = g.zeros({t, v});
    TensorId loss = cross_entropy_masked(g, logits, {0, 1, 2}, {true, true, true});
    REQUIRE(g.scalar(loss) == Catch::Approx(std::log(7.0)).margin(1e-9));

    REQUIRE_THROWS_AS(cross_entropy_masked(g, logits, {0, 1, 2}, {false, false, false}), DataError);
}

TEST_CASE("gradients: upsample_rows and weighted_point_sum pass finite differences") {
    ParamStore<double> store;
    Rng rng(19);
    auto& x = store.create("x", {2, 3, 4});
    init_normal(x, 1.0, rng);
    auto& s4 = store.create("s", {2, 2, 3, 2});
    init_normal(s4, 1.0, rng);
    auto& wts = store.create("wts", {2, 2, 3});
    init_normal(wts, 0.5, rng);

    auto build = [&](Graph<double>& g, ParamStore<double>& s) {
        TensorId up = upsample_rows(g, s.leaf(g, "x"), 2);
        TensorId l1 = g.mean_sq_diff(up, g.zeros(g.shape(up)));
        TensorId wsum = weighted_point_sum(g, s.leaf(g, "s"), g.softmax_rows(s.leaf(g, "wts"), 3));
        TensorId l2 = g.mean_sq_diff(wsum, g.zeros(g.shape(wsum)));
        return g.add(l1, l2);
    };
    auto report = grad_check<double>(build, store, 1e-3, 1e-3);
    INFO(report.worst_param << " rel " << report.max_rel_err);
    REQUIRE(report.pass);
}

TEST_CASE("forward passes are deterministic for identical inputs") {
    auto run = [] {
        Graph<float> g;
        Rng rng(23);
        std::vector<float> x(24);
        for (auto& v : x) v = static_cast<float>(rng.normal());
        TensorId a = g.input({4, 6}, x);
        TensorId sm = g.softmax_rows(a, 6);
        return g.val(sm);
    };
    REQUIRE(run() == run());
}

TEST_CASE("mtck checkpoint round-trip is bit-exact with metadata") {
    ParamStore<float> store;
    Rng rng(29);
    auto& a = store.create("enc.w", {3, 4});
    init_normal(a, 1.0, rng);
    auto& b = store.create("enc.b", {4});
    init_normal(b, 1.0, rng);

    const auto dir = std::filesystem::temp_directory_path() / "motiontok_test_mtck";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "model.mtck").string();
    save_checkpoint(path, store, {{"config_hash", "0011223344556677"}, {"kind", "test"}});

    Checkpoint ck = load_checkpoint(path);
    REQUIRE(ck.meta.at("config_hash") == "0011223344556677");
    REQUIRE(ck.meta.at("kind") == "test");
    REQUIRE(ck.params.at("enc.w").shape == Shape{3, 4});
    REQUIRE(ck.params.at("enc.w").value == a.value);
    REQUIRE(ck.params.at("enc.b").value == b.value);

    // Save the loaded store again: byte-identical files.
    const std::string path2 = (dir / "model2.mtck").string();
    save_checkpoint(path2, ck.params, {{"config_hash", "0011223344556677"}, {"kind", "test"}});
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    REQUIRE(s1 == s2);
    std::filesystem::remove_all(dir);
}
