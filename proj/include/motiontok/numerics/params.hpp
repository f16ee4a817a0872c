#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "motiontok/common.hpp"
#include "motiontok/numerics/graph.hpp"

namespace motiontok::num {

template <typename T>
struct ParamTensor {
    Shape shape;
    std::vector<T> value;
    std::vector<T> grad;
    std::vector<T> adam_m;
    std::vector<T> adam_v;

    std::size_t size() const { return value.size(); }
};

// Named, ordered parameter set. std::map keeps iteration deterministic,
// which the seeded-run reproducibility contract depends on.
template <typename T>
class ParamStore {
public:
    ParamTensor<T>& create(const std::string& name, Shape shape) {
        if (params_.count(name)) throw ConfigError("param store: duplicate parameter " + name);
        ParamTensor<T> p;
        p.shape = std::move(shape);
        const std::size_t n = numel(p.shape);
        p.value.assign(n, T(0));
        p.grad.assign(n, T(0));
        p.adam_m.assign(n, T(0));
        p.adam_v.assign(n, T(0));
        return params_.emplace(name, std::move(p)).first->second;
    }

    ParamTensor<T>& at(const std::string& name) {
        auto it = params_.find(name);
        if (it == params_.end()) throw ConfigError("param store: unknown parameter " + name);
        return it->second;
    }
    const ParamTensor<T>& at(const std::string& name) const {
        auto it = params_.find(name);
        if (it == params_.end()) throw ConfigError("param store: unknown parameter " + name);
        return it->second;
    }
    bool contains(const std::string& name) const { return params_.count(name) > 0; }

    void zero_grad() {
        for (auto& [name, p] : params_) p.grad.assign(p.grad.size(), T(0));
    }

    std::size_t total_size() const {
        std::size_t n = 0;
        for (const auto& [name, p] : params_) n += p.size();
        return n;
    }

    std::map<std::string, ParamTensor<T>>& all() { return params_; }
    const std::map<std::string, ParamTensor<T>>& all() const { return params_; }

    // Graph leaf for one parameter; gradients flow back into p.grad.
    TensorId leaf(Graph<T>& g, const std::string& name) {
        ParamTensor<T>& p = at(name);
        return g.param(p.shape, p.value, &p.grad);
    }

private:
    std::map<std::string, ParamTensor<T>> params_;
};

// Uniform +-1/sqrt(fan_in) for dense/conv weights.
template <typename T>
void init_uniform_fanin(ParamTensor<T>& p, int fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& v : p.value) v = static_cast<T>(rng.uniform(-bound, bound));
}

template <typename T>
void init_zeros(ParamTensor<T>& p) {
    p.value.assign(p.value.size(), T(0));
}

template <typename T>
void init_constant(ParamTensor<T>& p, double c) {
    p.value.assign(p.value.size(), static_cast<T>(c));
}

template <typename T>
void init_normal(ParamTensor<T>& p, double stddev, Rng& rng) {
    for (auto& v : p.value) v = static_cast<T>(stddev * rng.normal());
}

// Output projection that averages identical head copies at initialization:
// W (H*C x C) = vertical stack of I_C / H. Makes zero-offset deformable
// attention an exact identity on the sampled feature.
template <typename T>
void init_head_average(ParamTensor<T>& p, int heads, int channels) {
    if (p.shape != Shape{heads * channels, channels})
        throw ConfigError("init_head_average: expected (heads*C, C) weight");
    init_zeros(p);
    for (int h = 0; h < heads; ++h)
        for (int c = 0; c < channels; ++c)
            p.value[(static_cast<std::size_t>(h) * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)) *
                        static_cast<std::size_t>(channels) +
                    static_cast<std::size_t>(c)] = static_cast<T>(1.0 / heads);
}

struct AdamConfig {
    double lr = 2e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

// AdamW; with weight_decay = 0 it reduces to Adam.
template <typename T>
class AdamW {
public:
    explicit AdamW(AdamConfig cfg) : cfg_(cfg) {}

    void step(ParamStore<T>& store) {
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
        const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
        for (auto& [name, p] : store.all()) {
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double gr = static_cast<double>(p.grad[i]);
                const double m = cfg_.beta1 * static_cast<double>(p.adam_m[i]) + (1.0 - cfg_.beta1) * gr;
                const double v = cfg_.beta2 * static_cast<double>(p.adam_v[i]) + (1.0 - cfg_.beta2) * gr * gr;
                p.adam_m[i] = static_cast<T>(m);
                p.adam_v[i] = static_cast<T>(v);
                const double update = (m / bc1) / (std::sqrt(v / bc2) + cfg_.eps) + cfg_.weight_decay * static_cast<double>(p.value[i]);
                p.value[i] = static_cast<T>(static_cast<double>(p.value[i]) - cfg_.lr * update);
            }
        }
    }

    int steps_taken() const { return t_; }

private:
    AdamConfig cfg_;
    int t_ = 0;
};

}  // namespace motiontok::num
