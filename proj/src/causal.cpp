#include "cotgan/causal.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace cotgan {

const char* head_name(HeadKind kind) {
    switch (kind) {
        case HeadKind::Linear: return "linear";
        case HeadKind::Sigmoid: return "sigmoid";
        case HeadKind::Tanh: return "tanh";
    }
    throw std::invalid_argument("head_name: bad HeadKind");
}

HeadKind parse_head_kind(const std::string& name) {
    if (name == "linear") return HeadKind::Linear;
    if (name == "sigmoid") return HeadKind::Sigmoid;
    if (name == "tanh") return HeadKind::Tanh;
    throw std::invalid_argument("parse_head_kind: unknown head '" + name + "'");
}

namespace {

constexpr index_t kFilterLen = 5;

Tensor fan_in_uniform(Rng& rng, const Shape& shape, index_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    return rng.uniform_tensor(shape, -bound, bound);
}

}  // namespace

TraceNetParams init_trace_net(index_t d, index_t hidden, index_t trace_dim, HeadKind head,
                              Rng& rng) {
    if (d < 1 || hidden < 1 || trace_dim < 1)
        throw std::invalid_argument("init_trace_net: need d, hidden, trace_dim >= 1");
    TraceNetParams p;
    p.conv1_w = fan_in_uniform(rng, {hidden, d, kFilterLen}, d * kFilterLen);
    p.conv1_b = Tensor({hidden});
    p.conv2_w = fan_in_uniform(rng, {hidden, hidden, kFilterLen}, hidden * kFilterLen);
    p.conv2_b = Tensor({hidden});
    p.head_w = fan_in_uniform(rng, {trace_dim, hidden, 1}, hidden);
    p.head_b = Tensor({trace_dim});
    p.head = head;
    return p;
}

std::vector<std::pair<std::string, Tensor*>> named_parameters(TraceNetParams& p) {
    return {{"conv1_w", &p.conv1_w}, {"conv1_b", &p.conv1_b}, {"conv2_w", &p.conv2_w},
            {"conv2_b", &p.conv2_b}, {"head_w", &p.head_w},   {"head_b", &p.head_b}};
}

CausalCostParams init_causal_cost(index_t d, index_t hidden, index_t trace_dim, HeadKind head,
                                  double eta, Rng& rng) {
    if (!(eta > 0.0)) throw std::invalid_argument("init_causal_cost: eta must be positive");
    CausalCostParams p;
    p.h_net = init_trace_net(d, hidden, trace_dim, head, rng);
    p.m_net = init_trace_net(d, hidden, trace_dim, head, rng);
    p.eta = eta;
    return p;
}

std::vector<std::pair<std::string, Tensor*>> named_parameters(CausalCostParams& p) {
    std::vector<std::pair<std::string, Tensor*>> out;
    for (auto& [name, ptr] : named_parameters(p.h_net)) out.emplace_back("h." + name, ptr);
    for (auto& [name, ptr] : named_parameters(p.m_net)) out.emplace_back("m." + name, ptr);
    return out;
}

TraceNetVars trace_net_leaves(Tape& tape, const TraceNetParams& p) {
    TraceNetVars v;
    v.conv1_w = tape.leaf(p.conv1_w);
    v.conv1_b = tape.leaf(p.conv1_b);
    v.conv2_w = tape.leaf(p.conv2_w);
    v.conv2_b = tape.leaf(p.conv2_b);
    v.head_w = tape.leaf(p.head_w);
    v.head_b = tape.leaf(p.head_b);
    v.head = p.head;
    return v;
}

Var causal_forward(const TraceNetVars& net, Var batch) {
    Var h1 = relu(causal_conv1d(batch, net.conv1_w, net.conv1_b));
    Var h2 = relu(causal_conv1d(h1, net.conv2_w, net.conv2_b));
    Var out = causal_conv1d(h2, net.head_w, net.head_b);
    switch (net.head) {
        case HeadKind::Linear: return out;
        case HeadKind::Sigmoid: return sigmoid(out);
        case HeadKind::Tanh: return tanh(out);
    }
    throw std::invalid_argument("causal_forward: bad HeadKind");
}

Tensor causal_forward(const TraceNetParams& net, const SequenceBatch& batch) {
    if (batch.T < 1) throw std::invalid_argument("causal_forward: batch needs T >= 1");
    Tape t;
    TraceNetVars v;
    v.conv1_w = t.constant(net.conv1_w);
    v.conv1_b = t.constant(net.conv1_b);
    v.conv2_w = t.constant(net.conv2_w);
    v.conv2_b = t.constant(net.conv2_b);
    v.head_w = t.constant(net.head_w);
    v.head_b = t.constant(net.head_b);
    v.head = net.head;
    return t.value(causal_forward(v, t.constant(batch.values)));
}

namespace {

void check_traces(const char* who, const Tensor& h, const Tensor& m) {
    if (h.rank() != 3 || m.rank() != 3)
        throw std::invalid_argument(std::string(who) + ": traces must be [batch,T,J], got " +
                                    shape_to_string(h.shape) + " and " + shape_to_string(m.shape));
    if (h.extent(1) != m.extent(1) || h.extent(2) != m.extent(2))
        throw std::invalid_argument(std::string(who) + ": trace layout mismatch, " +
                                    shape_to_string(h.shape) + " vs " + shape_to_string(m.shape));
}

// One interaction entry, increments accumulated step-outer channel-inner.
// That is the order the tape overload's matmul over the [T-1,J] flattening
// takes, which keeps the two assembly routes bit-identical.
double interaction_entry(const Tensor& h, const Tensor& m, index_t row, index_t col) {
    const index_t T = h.extent(1), J = h.extent(2);
    double acc = 0.0;
    for (index_t t = 0; t + 1 < T; ++t)
        for (index_t k = 0; k < J; ++k)
            acc += (m.at(row, t + 1, k) - m.at(row, t, k)) * h.at(col, t, k);
    return acc;
}

}  // namespace

Tensor assemble_causal_cost(const Tensor& base, const Tensor& h_traces, const Tensor& m_traces) {
    check_traces("assemble_causal_cost", h_traces, m_traces);
    if (base.rank() != 2 || base.extent(0) != m_traces.extent(0) ||
        base.extent(1) != h_traces.extent(0))
        throw std::invalid_argument("assemble_causal_cost: base " + shape_to_string(base.shape) +
                                    " does not pair m traces " + shape_to_string(m_traces.shape) +
                                    " with h traces " + shape_to_string(h_traces.shape));
    const index_t mx = base.extent(0), my = base.extent(1);
    Tensor out(base.shape);
    for (index_t i = 0; i < mx; ++i)
        for (index_t j = 0; j < my; ++j)
            out.at(i, j) = base.at(i, j) + interaction_entry(h_traces, m_traces, i, j);
    return out;
}

Var assemble_causal_cost(Var base, Var h_traces, Var m_traces) {
    if (base.tape != h_traces.tape || base.tape != m_traces.tape)
        throw std::invalid_argument("assemble_causal_cost: vars from different tapes");
    Tape& t = *base.tape;
    const Tensor& bv = t.value(base);
    const Tensor& hv = t.value(h_traces);
    const Tensor& mv = t.value(m_traces);
    check_traces("assemble_causal_cost", hv, mv);
    if (bv.rank() != 2 || bv.extent(0) != mv.extent(0) || bv.extent(1) != hv.extent(0))
        throw std::invalid_argument("assemble_causal_cost: base " + shape_to_string(bv.shape) +
                                    " does not pair m traces " + shape_to_string(mv.shape) +
                                    " with h traces " + shape_to_string(hv.shape));
    const index_t mx = bv.extent(0), my = bv.extent(1);
    const index_t T = hv.extent(1), J = hv.extent(2);
    if (T == 1) return base;  // no increments to add
    Var dm = sub(slice(m_traces, 1, 1, T - 1), slice(m_traces, 1, 0, T - 1));
    Var hh = slice(h_traces, 1, 0, T - 1);
    Var inter = matmul(reshape(dm, {mx, (T - 1) * J}), transpose(reshape(hh, {my, (T - 1) * J})));
    return add(base, inter);
}

double causality_violation(const Tensor& plan, const Tensor& h_traces, const Tensor& m_traces) {
    check_traces("causality_violation", h_traces, m_traces);
    if (plan.rank() != 2 || plan.extent(0) != m_traces.extent(0) ||
        plan.extent(1) != h_traces.extent(0))
        throw std::invalid_argument("causality_violation: plan " + shape_to_string(plan.shape) +
                                    " does not pair m traces " + shape_to_string(m_traces.shape) +
                                    " with h traces " + shape_to_string(h_traces.shape));
    const index_t mx = plan.extent(0), my = plan.extent(1);
    double total = 0.0;
    for (index_t i = 0; i < mx; ++i)
        for (index_t j = 0; j < my; ++j)
            total += plan.at(i, j) * interaction_entry(h_traces, m_traces, i, j);
    return total;
}

namespace {

void check_penalty_input(const Tensor& m_traces, double eta) {
    if (m_traces.rank() != 3)
        throw std::invalid_argument("martingale_penalty: traces must be [m,T,J], got " +
                                    shape_to_string(m_traces.shape));
    if (!(eta > 0.0)) throw std::invalid_argument("martingale_penalty: eta must be positive");
}

}  // namespace

// Every accumulation below walks the same memory order as the tape overload's
// reductions, so the two routes agree bitwise.
PenaltyReport martingale_penalty(const Tensor& m_traces, double eta) {
    check_penalty_input(m_traces, eta);
    const index_t m = m_traces.extent(0), T = m_traces.extent(1), J = m_traces.extent(2);
    const index_t n = m * T;
    const double wn = 1.0 / static_cast<double>(n);

    PenaltyReport rep;
    rep.variance = Tensor({J});
    std::vector<double> mu(static_cast<std::size_t>(J));
    for (index_t j = 0; j < J; ++j) {
        double s = 0.0;
        for (index_t r = 0; r < n; ++r) s += m_traces[r * J + j];
        mu[static_cast<std::size_t>(j)] = s * wn;
    }
    for (index_t j = 0; j < J; ++j) {
        double s = 0.0;
        for (index_t r = 0; r < n; ++r) {
            const double dev = m_traces[r * J + j] - mu[static_cast<std::size_t>(j)];
            s += dev * dev;
        }
        rep.variance[j] = s * wn;
    }

    double total = 0.0;
    if (T >= 2) {
        rep.contributions = Tensor({J, T - 1});
        std::vector<double> denom(static_cast<std::size_t>(J));
        for (index_t j = 0; j < J; ++j)
            denom[static_cast<std::size_t>(j)] = std::sqrt(rep.variance[j]) + eta;
        for (index_t tt = 0; tt + 1 < T; ++tt)
            for (index_t j = 0; j < J; ++j) {
                double s = 0.0;
                for (index_t i = 0; i < m; ++i) {
                    const double d = m_traces.at(i, tt + 1, j) - m_traces.at(i, tt, j);
                    s += d / denom[static_cast<std::size_t>(j)];
                }
                const double a = std::abs(s);
                rep.contributions.at(j, tt) = a;
                total += a;
            }
    }
    rep.value = total * wn;
    return rep;
}

Var martingale_penalty(Var m_traces, double eta) {
    Tape& t = *m_traces.tape;
    const Tensor& mv = t.value(m_traces);
    check_penalty_input(mv, eta);
    const index_t m = mv.extent(0), T = mv.extent(1), J = mv.extent(2);
    const double wn = 1.0 / static_cast<double>(m * T);
    if (T == 1) return scale(sum_all(m_traces), 0.0);
    Var flat = reshape(m_traces, {m * T, J});
    Var mu = mean(flat, 0);
    Var dev = sub(flat, reshape(mu, {1, J}));
    Var var = mean(mul(dev, dev), 0);
    Var denom = add_scalar(sqrt(var), eta);
    Var dm = sub(slice(m_traces, 1, 1, T - 1), slice(m_traces, 1, 0, T - 1));
    Var scaled = div(dm, reshape(denom, {1, 1, J}));
    Var bsum = sum(scaled, 0);
    return scale(sum_all(abs(bsum)), wn);
}

}  // namespace cotgan
