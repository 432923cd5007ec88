#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "cotgan/tape.hpp"

namespace cotgan::testing {

// Builds the graph under test on a fresh tape. Receives one leaf per input
// tensor, returns the scalar output.
using GraphBuilder = std::function<Var(Tape&, const std::vector<Var>&)>;

struct GradCheckResult {
    double max_rel_err = 0.0;
    double analytic_at_max = 0.0;
    double numeric_at_max = 0.0;
};

inline double eval_scalar(const GraphBuilder& build, const std::vector<Tensor>& inputs) {
    Tape t;
    std::vector<Var> vars;
    vars.reserve(inputs.size());
    for (const Tensor& x : inputs) vars.push_back(t.leaf(x));
    return t.scalar_value(build(t, vars));
}

// Central-difference check of every input coordinate. Relative error uses a
// floor so near-zero gradients compare absolutely.
inline GradCheckResult gradcheck(const GraphBuilder& build, std::vector<Tensor> inputs,
                                 double h = 1e-5, double floor = 1e-6) {
    Tape t;
    std::vector<Var> vars;
    vars.reserve(inputs.size());
    for (const Tensor& x : inputs) vars.push_back(t.leaf(x));
    Var out = build(t, vars);
    t.backward(out);
    std::vector<Tensor> analytic;
    analytic.reserve(vars.size());
    for (Var v : vars) analytic.push_back(t.grad(v));

    GradCheckResult res;
    for (std::size_t s = 0; s < inputs.size(); ++s) {
        for (index_t i = 0; i < inputs[s].size(); ++i) {
            const double orig = inputs[s][i];
            inputs[s][i] = orig + h;
            const double fp = eval_scalar(build, inputs);
            inputs[s][i] = orig - h;
            const double fm = eval_scalar(build, inputs);
            inputs[s][i] = orig;
            const double num = (fp - fm) / (2.0 * h);
            const double ana = analytic[s][i];
            const double err =
                std::abs(ana - num) / std::max({std::abs(ana), std::abs(num), floor});
            if (err > res.max_rel_err) {
                res.max_rel_err = err;
                res.analytic_at_max = ana;
                res.numeric_at_max = num;
            }
        }
    }
    return res;
}

}  // namespace cotgan::testing
