#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "motiontok/numerics/graph.hpp"
#include "motiontok/numerics/params.hpp"

namespace motiontok::num {

struct GradCheckReport {
    double max_rel_err = 0.0;
    double max_abs_err = 0.0;
    std::string worst_param;
    std::size_t checked = 0;
    bool pass = false;
};

// Central-difference oracle against the analytic gradients. `build_loss`
// must construct the full graph from the store and return the scalar loss
// node; it must be deterministic (freeze any data-dependent discrete
// choices, e.g. quantizer assignments, outside the closure).
template <typename T>
GradCheckReport grad_check(const std::function<TensorId(Graph<T>&, ParamStore<T>&)>& build_loss,
                           ParamStore<T>& params, double eps, double tol,
                           int max_elems_per_param = -1) {
    static_assert(std::is_floating_point_v<T>);
    GradCheckReport report;

    auto eval = [&]() -> T {
        Graph<T> g;
        TensorId loss = build_loss(g, params);
        const T v = g.scalar(loss);
        if (!std::isfinite(static_cast<double>(v))) throw NumericError("grad_check: non-finite loss");
        return v;
    };

    params.zero_grad();
    {
        Graph<T> g;
        TensorId loss = build_loss(g, params);
        if (!std::isfinite(static_cast<double>(g.scalar(loss)))) throw NumericError("grad_check: non-finite loss");
        g.backward(loss);
    }

    Rng pick(12345);
    for (auto& [name, p] : params.all()) {
        std::vector<std::size_t> idx;
        if (max_elems_per_param > 0 && p.size() > static_cast<std::size_t>(max_elems_per_param)) {
            for (int i = 0; i < max_elems_per_param; ++i) idx.push_back(pick.below(p.size()));
        } else {
            for (std::size_t i = 0; i < p.size(); ++i) idx.push_back(i);
        }
        for (std::size_t i : idx) {
            const T saved = p.value[i];
            p.value[i] = saved + static_cast<T>(eps);
            const double up = static_cast<double>(eval());
            p.value[i] = saved - static_cast<T>(eps);
            const double dn = static_cast<double>(eval());
            p.value[i] = saved;
            const double fd = (up - dn) / (2.0 * eps);
            const double an = static_cast<double>(p.grad[i]);
            const double abs_err = std::fabs(an - fd);
            const double rel = abs_err / std::max({std::fabs(an), std::fabs(fd), 1e-6});
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_param = name;
            }
            report.max_abs_err = std::max(report.max_abs_err, abs_err);
            ++report.checked;
        }
    }
    report.pass = report.max_rel_err < tol;
    return report;
}

}  // namespace motiontok::num
