#include "cotgan/tape.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace cotgan {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Tensor unary_map(const Tensor& x, double (*f)(double)) {
    Tensor out(x.shape);
    for (index_t i = 0; i < x.size(); ++i) out.data[static_cast<std::size_t>(i)] = f(x.data[static_cast<std::size_t>(i)]);
    return out;
}

void check_same_tape(Var a, Var b, const char* op) {
    if (a.tape == nullptr || b.tape == nullptr || a.tape != b.tape)
        throw std::invalid_argument(std::string(op) + ": operands live on different tapes");
}

Tensor transpose2d(const Tensor& x) {
    if (x.rank() != 2) throw std::invalid_argument("transpose2d: rank-2 tensor required");
    const index_t r = x.extent(0), c = x.extent(1);
    Tensor out({c, r});
    for (index_t i = 0; i < r; ++i)
        for (index_t j = 0; j < c; ++j)
            out.data[static_cast<std::size_t>(j * r + i)] = x.data[static_cast<std::size_t>(i * c + j)];
    return out;
}

}  // namespace

Var Tape::leaf(Tensor value) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = true;
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Tensor value) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = false;
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::record(Tensor value, std::vector<int> parents, BackFn fn) {
    bool needs = false;
    for (int p : parents) {
        if (p < 0 || p >= static_cast<int>(nodes_.size()))
            throw std::logic_error("Tape::record: parent id out of range");
        needs = needs || nodes_[static_cast<std::size_t>(p)].needs_grad;
    }
    Node n;
    n.value = std::move(value);
    n.parents = std::move(parents);
    n.needs_grad = needs;
    if (needs) n.backward = std::move(fn);
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

const Tensor& Tape::value(Var v) const {
    if (v.tape != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
        throw std::invalid_argument("Tape::value: handle does not belong to this tape");
    return nodes_[static_cast<std::size_t>(v.id)].value;
}

double Tape::scalar_value(Var v) const {
    const Tensor& t = value(v);
    if (t.size() != 1) throw std::invalid_argument("Tape::scalar_value: tensor is not scalar");
    return t.data[0];
}

Tensor Tape::grad(Var v) const {
    const Tensor& val = value(v);
    const Tensor& g = nodes_[static_cast<std::size_t>(v.id)].grad;
    if (g.data.empty()) return Tensor(val.shape);  // exact zeros
    return g;
}

void Tape::accum_grad(int id, const Tensor& g) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad) return;
    if (!g.same_shape(n.value))
        throw std::logic_error("Tape::accum_grad: gradient shape mismatch");
    if (n.grad.data.empty()) n.grad = Tensor(n.value.shape);
    for (index_t i = 0; i < g.size(); ++i)
        n.grad.data[static_cast<std::size_t>(i)] += g.data[static_cast<std::size_t>(i)];
}

void Tape::backward(Var output) {
    const Tensor& out = value(output);
    if (out.size() != 1)
        throw std::invalid_argument("Tape::backward: output must be scalar, got shape " +
                                    shape_to_string(out.shape));
    for (Node& n : nodes_) n.grad = Tensor{};
    Node& head = nodes_[static_cast<std::size_t>(output.id)];
    head.grad = Tensor(head.value.shape);
    head.grad.data[0] = 1.0;
    for (int id = output.id; id >= 0; --id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (n.grad.data.empty() || !n.backward) continue;
        n.backward(*this, id);
    }
}

// ---- elementwise binary ----

Var add(Var a, Var b) {
    check_same_tape(a, b, "add");
    Tape& t = *a.tape;
    Tensor out = broadcast_binary(t.value(a), t.value(b), "add",
                                  [](double x, double y) { return x + y; });
    const int pa = a.id, pb = b.id;
    return t.record(std::move(out), {pa, pb}, [pa, pb](Tape& tp, int self) {
        const Tensor& g = tp.grad_ref(self);
        if (tp.needs_grad(pa)) tp.accum_grad(pa, reduce_to_shape(g, tp.value(pa).shape));
        if (tp.needs_grad(pb)) tp.accum_grad(pb, reduce_to_shape(g, tp.value(pb).shape));
    });
}

Var sub(Var a, Var b) {
    check_same_tape(a, b, "sub");
    Tape& t = *a.tape;
    Tensor out = broadcast_binary(t.value(a), t.value(b), "sub",
                                  [](double x, double y) { return x - y; });
    const int pa = a.id, pb = b.id;
    return t.record(std::move(out), {pa, pb}, [pa, pb](Tape& tp, int self) {
        const Tensor& g = tp.grad_ref(self);
        if (tp.needs_grad(pa)) tp.accum_grad(pa, reduce_to_shape(g, tp.value(pa).shape));
        if (tp.needs_grad(pb)) {
            Tensor r = reduce_to_shape(g, tp.value(pb).shape);
            for (double& x : r.data) x = -x;
            tp.accum_grad(pb, r);
        }
    });
}

Var mul(Var a, Var b) {
    check_same_tape(a, b, "mul");
    Tape& t = *a.tape;
    Tensor out = broadcast_binary(t.value(a), t.value(b), "mul",
                                  [](double x, double y) { return x * y; });
    const int pa = a.id, pb = b.id;
    return t.record(std::move(out), {pa, pb}, [pa, pb](Tape& tp, int self) {
        const Tensor& g = tp.grad_ref(self);
        if (tp.needs_grad(pa)) {
            Tensor gb = broadcast_binary(g, tp.value(pb), "mul",
                                         [](double x, double y) { return x * y; });
            tp.accum_grad(pa, reduce_to_shape(gb, tp.value(pa).shape));
        }
        if (tp.needs_grad(pb)) {
            Tensor ga = broadcast_binary(g, tp.value(pa), "mul",
                                         [](double x, double y) { return x * y; });
            tp.accum_grad(pb, reduce_to_shape(ga, tp.value(pb).shape));
        }
    });
}

Var div(Var a, Var b) {
    check_same_tape(a, b, "div");
    Tape& t = *a.tape;
    Tensor out = broadcast_binary(t.value(a), t.value(b), "div",
                                  [](double x, double y) { return x / y; });
    const int pa = a.id, pb = b.id;
    return t.record(std::move(out), {pa, pb}, [pa, pb](Tape& tp, int self) {
        const Tensor& g = tp.grad_ref(self);
        if (tp.needs_grad(pa)) {
            Tensor ga = broadcast_binary(g, tp.value(pb), "div",
                                         [](double x, double y) { return x / y; });
            tp.accum_grad(pa, reduce_to_shape(ga, tp.value(pa).shape));
        }
        if (tp.needs_grad(pb)) {
            // d(a/b)/db = -out/b
            Tensor gb = broadcast_binary(g, tp.value(self), "mul",
                                         [](double x, double y) { return x * y; });
            gb = broadcast_binary(gb, tp.value(pb), "div",
                                  [](double x, double y) { return x / y; });
            for (double& x : gb.data) x = -x;
            tp.accum_grad(pb, reduce_to_shape(gb, tp.value(pb).shape));
        }
    });
}

Var maximum(Var a, Var b) {
    check_same_tape(a, b, "maximum");
    Tape& t = *a.tape;
    Tensor out = broadcast_binary(t.value(a), t.value(b), "maximum",
                                  [](double x, double y) { return x >= y ? x : y; });
    const int pa = a.id, pb = b.id;
    return t.record(std::move(out), {pa, pb}, [pa, pb](Tape& tp, int self) {
        const Tensor& g = tp.grad_ref(self);
        Tensor mask = broadcast_binary(tp.value(pa), tp.value(pb), "maximum",
                                       [](double x, double y) { return x >= y ? 1.0 : 0.0; });
        if (tp.needs_grad(pa)) {
            Tensor ga(g.shape);
            for (index_t i = 0; i < g.size(); ++i)
                ga.data[static_cast<std::size_t>(i)] =
                    g.data[static_cast<std::size_t>(i)] * mask.data[static_cast<std::size_t>(i)];
            tp.accum_grad(pa, reduce_to_shape(ga, tp.value(pa).shape));
        }
        if (tp.needs_grad(pb)) {
            Tensor gb(g.shape);
            for (index_t i = 0; i < g.size(); ++i)
                gb.data[static_cast<std::size_t>(i)] =
                    g.data[static_cast<std::size_t>(i)] * (1.0 - mask.data[static_cast<std::size_t>(i)]);
            tp.accum_grad(pb, reduce_to_shape(gb, tp.value(pb).shape));
        }
    });
}

// ---- elementwise unary ----

namespace {

// dy/dx expressed from input and output values.
Var unary_op(Var x, const char* name, double (*fwd)(double), double (*dydx)(double, double)) {
    (void)name;
    Tape& t = *x.tape;
    Tensor out = unary_map(t.value(x), fwd);
    const int px = x.id;
    return t.record(std::move(out), {px}, [px, dydx](Tape& tp, int self) {
        const Tensor& g = tp.grad_ref(self);
        const Tensor& xv = tp.value(px);
        const Tensor& yv = tp.value(self);
        Tensor gx(xv.shape);
        for (index_t i = 0; i < xv.size(); ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            gx.data[k] = g.data[k] * dydx(xv.data[k], yv.data[k]);
        }
        tp.accum_grad(px, gx);
    });
}

}  // namespace

Var exp(Var x) {
    return unary_op(x, "exp", [](double v) { return std::exp(v); },
                    [](double, double y) { return y; });
}

Var log(Var x) {
    const Tensor& xv = x.tape->value(x);
    for (double v : xv.data)
        if (v < 0.0) throw std::invalid_argument("log: negative input " + std::to_string(v));
    return unary_op(x, "log", [](double v) { return std::log(v); },
                    [](double v, double) { return 1.0 / v; });
}

Var tanh(Var x) {
    return unary_op(x, "tanh", [](double v) { return std::tanh(v); },
                    [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var x) {
    return unary_op(
        x, "sigmoid",
        [](double v) {
            if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
            const double e = std::exp(v);
            return e / (1.0 + e);
        },
        [](double, double y) { return y * (1.0 - y); });
}

Var relu(Var x) {
    return unary_op(x, "relu", [](double v) { return v >= 0.0 ? v : 0.0; },
                    [](double v, double) { return v >= 0.0 ? 1.0 : 0.0; });
}

Var abs(Var x) {
    return unary_op(x, "abs", [](double v) { return v >= 0.0 ? v : -v; },
                    [](double v, double) { return v >= 0.0 ? 1.0 : -1.0; });
}

Var sqrt(Var x) {
    const Tensor& xv = x.tape->value(x);
    for (double v : xv.data)
        if (v < 0.0) throw std::invalid_argument("sqrt: negative input " + std::to_string(v));
    return unary_op(x, "sqrt", [](double v) { return std::sqrt(v); },
                    [](double, double y) { return 0.5 / y; });
}

Var scale(Var x, double k) {
    Tape& t = *x.tape;
    const Tensor& xv = t.value(x);
    Tensor out(xv.shape);
    for (index_t i = 0; i < xv.size(); ++i)
        out.data[static_cast<std::size_t>(i)] = xv.data[static_cast<std::size_t>(i)] * k;
    const int px = x.id;
    return t.record(std::move(out), {px}, [px, k](Tape& tp, int self) {
        const Tensor& g = tp.grad_ref(self);
        Tensor gx(g.shape);
        for (index_t i = 0; i < g.size(); ++i)
            gx.data[static_cast<std::size_t>(i)] = g.data[static_cast<std::size_t>(i)] * k;
        tp.accum_grad(px, gx);
    });
}

Var add_scalar(Var x, double c) {
    Tape& t = *x.tape;
    const Tensor& xv = t.value(x);
    Tensor out(xv.shape);
    for (index_t i = 0; i < xv.size(); ++i)
        out.data[static_cast<std::size_t>(i)] = xv.data[static_cast<std::size_t>(i)] + c;
    const int px = x.id;
    return t.record(std::move(out), {px}, [px](Tape& tp, int self) {
        tp.accum_grad(px, tp.grad_ref(self));
    });
}

// ---- matmul ----

Var matmul(Var a, Var b) {
    check_same_tape(a, b, "matmul");
    Tape& t = *a.tape;
    Tensor out = matmul_forward(t.value(a), t.value(b));
    const int pa = a.id, pb = b.id;
    return t.record(std::move(out), {pa, pb}, [pa, pb](Tape& tp, int self) {
        const Tensor& g = tp.grad_ref(self);
        if (tp.needs_grad(pa)) tp.accum_grad(pa, matmul_forward(g, transpose2d(tp.value(pb))));
        if (tp.needs_grad(pb)) tp.accum_grad(pb, matmul_forward(transpose2d(tp.value(pa)), g));
    });
}

// ---- reductions ----

namespace {

Shape drop_axis(const Shape& s, index_t axis) {
    Shape out;
    for (index_t i = 0; i < static_cast<index_t>(s.size()); ++i)
        if (i != axis) out.push_back(s[static_cast<std::size_t>(i)]);
    if (out.empty()) out.push_back(1);
    return out;
}

}  // namespace

Var logsumexp(Var x, index_t axis) {
    Tape& t = *x.tape;
    const Tensor& xv = t.value(x);
    index_t outer, len, inner;
    split_axis(xv.shape, axis, outer, len, inner);
    Tensor out(drop_axis(xv.shape, axis));
    for (index_t o = 0; o < outer; ++o) {
        for (index_t in = 0; in < inner; ++in) {
            double mx = kNegInf;
            for (index_t k = 0; k < len; ++k) {
                const double v = xv.data[static_cast<std::size_t>((o * len + k) * inner + in)];
                if (v > mx) mx = v;
            }
            double r;
            if (mx == kNegInf) {
                r = kNegInf;
            } else {
                double s = 0.0;
                for (index_t k = 0; k < len; ++k)
                    s += std::exp(xv.data[static_cast<std::size_t>((o * len + k) * inner + in)] - mx);
                r = mx + std::log(s);
            }
            out.data[static_cast<std::size_t>(o * inner + in)] = r;
        }
    }
    const int px = x.id;
    return t.record(std::move(out), {px}, [px, axis](Tape& tp, int self) {
        const Tensor& g = tp.grad_ref(self);
        const Tensor& xv2 = tp.value(px);
        const Tensor& yv = tp.value(self);
        index_t o2, l2, i2;
        split_axis(xv2.shape, axis, o2, l2, i2);
        Tensor gx(xv2.shape);
        for (index_t o = 0; o < o2; ++o) {
            for (index_t in = 0; in < i2; ++in) {
                const double y = yv.data[static_cast<std::size_t>(o * i2 + in)];
                if (y == kNegInf) continue;  // no finite inputs, gradient stays 0
                const double go = g.data[static_cast<std::size_t>(o * i2 + in)];
                for (index_t k = 0; k < l2; ++k) {
                    const std::size_t idx = static_cast<std::size_t>((o * l2 + k) * i2 + in);
                    gx.data[idx] = go * std::exp(xv2.data[idx] - y);
                }
            }
        }
        tp.accum_grad(px, gx);
    });
}

namespace {

Var axis_reduce(Var x, index_t axis, bool take_mean) {
    Tape& t = *x.tape;
    const Tensor& xv = t.value(x);
    index_t outer, len, inner;
    split_axis(xv.shape, axis, outer, len, inner);
    Tensor out(drop_axis(xv.shape, axis));
    const double w = take_mean ? 1.0 / static_cast<double>(len) : 1.0;
    for (index_t o = 0; o < outer; ++o)
        for (index_t in = 0; in < inner; ++in) {
            double s = 0.0;
            for (index_t k = 0; k < len; ++k)
                s += xv.data[static_cast<std::size_t>((o * len + k) * inner + in)];
            out.data[static_cast<std::size_t>(o * inner + in)] = s * w;
        }
    const int px = x.id;
    return t.record(std::move(out), {px}, [px, axis, w](Tape& tp, int self) {
        const Tensor& g = tp.grad_ref(self);
        const Tensor& xv2 = tp.value(px);
        index_t o2, l2, i2;
        split_axis(xv2.shape, axis, o2, l2, i2);
        Tensor gx(xv2.shape);
        for (index_t o = 0; o < o2; ++o)
            for (index_t in = 0; in < i2; ++in) {
                const double go = g.data[static_cast<std::size_t>(o * i2 + in)] * w;
                for (index_t k = 0; k < l2; ++k)
                    gx.data[static_cast<std::size_t>((o * l2 + k) * i2 + in)] = go;
            }
        tp.accum_grad(px, gx);
    });
}

}  // namespace

Var sum(Var x, index_t axis) { return axis_reduce(x, axis, false); }
Var mean(Var x, index_t axis) { return axis_reduce(x, axis, true); }

namespace {

Var full_reduce(Var x, bool take_mean) {
    Tape& t = *x.tape;
    const Tensor& xv = t.value(x);
    double s = 0.0;
    for (double v : xv.data) s += v;
    const double w = take_mean ? 1.0 / static_cast<double>(xv.size()) : 1.0;
    const int px = x.id;
    return t.record(Tensor::scalar(s * w), {px}, [px, w](Tape& tp, int self) {
        const double go = tp.grad_ref(self).data[0] * w;
        Tensor gx(tp.value(px).shape);
        for (double& v : gx.data) v = go;
        tp.accum_grad(px, gx);
    });
}

}  // namespace

Var sum_all(Var x) { return full_reduce(x, false); }
Var mean_all(Var x) { return full_reduce(x, true); }

// ---- shape ops ----

Var reshape(Var x, Shape new_shape) {
    Tape& t = *x.tape;
    const Tensor& xv = t.value(x);
    if (shape_numel(new_shape) != xv.size())
        throw std::invalid_argument("reshape: cannot reshape " + shape_to_string(xv.shape) +
                                    " to " + shape_to_string(new_shape));
    Tensor out(new_shape, xv.data);
    const int px = x.id;
    return t.record(std::move(out), {px}, [px](Tape& tp, int self) {
        const Tensor& g = tp.grad_ref(self);
        tp.accum_grad(px, Tensor(tp.value(px).shape, g.data));
    });
}

Var transpose(Var x) {
    Tape& t = *x.tape;
    Tensor out = transpose2d(t.value(x));
    const int px = x.id;
    return t.record(std::move(out), {px}, [px](Tape& tp, int self) {
        if (tp.needs_grad(px)) tp.accum_grad(px, transpose2d(tp.grad_ref(self)));
    });
}

Var slice(Var x, index_t axis, index_t start, index_t len) {
    Tape& t = *x.tape;
    const Tensor& xv = t.value(x);
    index_t outer, alen, inner;
    split_axis(xv.shape, axis, outer, alen, inner);
    if (start < 0 || len <= 0 || start + len > alen)
        throw std::invalid_argument("slice: range [" + std::to_string(start) + ", " +
                                    std::to_string(start + len) + ") out of bounds for axis extent " +
                                    std::to_string(alen));
    Shape oshape = xv.shape;
    oshape[static_cast<std::size_t>(axis)] = len;
    Tensor out(oshape);
    for (index_t o = 0; o < outer; ++o)
        for (index_t k = 0; k < len; ++k)
            for (index_t in = 0; in < inner; ++in)
                out.data[static_cast<std::size_t>((o * len + k) * inner + in)] =
                    xv.data[static_cast<std::size_t>((o * alen + start + k) * inner + in)];
    const int px = x.id;
    return t.record(std::move(out), {px}, [px, axis, start, len](Tape& tp, int self) {
        const Tensor& g = tp.grad_ref(self);
        const Tensor& xv2 = tp.value(px);
        index_t o2, a2, i2;
        split_axis(xv2.shape, axis, o2, a2, i2);
        Tensor gx(xv2.shape);
        for (index_t o = 0; o < o2; ++o)
            for (index_t k = 0; k < len; ++k)
                for (index_t in = 0; in < i2; ++in)
                    gx.data[static_cast<std::size_t>((o * a2 + start + k) * i2 + in)] =
                        g.data[static_cast<std::size_t>((o * len + k) * i2 + in)];
        tp.accum_grad(px, gx);
    });
}

Var concat(const std::vector<Var>& xs, index_t axis) {
    if (xs.empty()) throw std::invalid_argument("concat: empty input list");
    Tape& t = *xs[0].tape;
    for (const Var& v : xs) check_same_tape(xs[0], v, "concat");
    const Tensor& first = t.value(xs[0]);
    const index_t rank = first.rank();
    if (axis < 0 || axis >= rank) throw std::invalid_argument("concat: axis out of range");
    index_t total = 0;
    std::vector<index_t> extents;
    for (const Var& v : xs) {
        const Tensor& tv = t.value(v);
        if (tv.rank() != rank)
            throw std::invalid_argument("concat: rank mismatch between inputs");
        for (index_t d = 0; d < rank; ++d)
            if (d != axis && tv.extent(d) != first.extent(d))
                throw std::invalid_argument("concat: shape mismatch " + shape_to_string(tv.shape) +
                                            " vs " + shape_to_string(first.shape));
        extents.push_back(tv.extent(axis));
        total += tv.extent(axis);
    }
    Shape oshape = first.shape;
    oshape[static_cast<std::size_t>(axis)] = total;
    index_t outer, dummy, inner;
    split_axis(oshape, axis, outer, dummy, inner);
    Tensor out(oshape);
    index_t off = 0;
    for (std::size_t s = 0; s < xs.size(); ++s) {
        const Tensor& tv = t.value(xs[s]);
        const index_t e = extents[s];
        for (index_t o = 0; o < outer; ++o)
            for (index_t k = 0; k < e; ++k)
                for (index_t in = 0; in < inner; ++in)
                    out.data[static_cast<std::size_t>((o * total + off + k) * inner + in)] =
                        tv.data[static_cast<std::size_t>((o * e + k) * inner + in)];
        off += e;
    }
    std::vector<int> parents;
    for (const Var& v : xs) parents.push_back(v.id);
    return t.record(std::move(out), parents,
                    [parents, axis, extents, total](Tape& tp, int self) {
                        const Tensor& g = tp.grad_ref(self);
                        index_t o2, d2, i2;
                        split_axis(g.shape, axis, o2, d2, i2);
                        index_t off2 = 0;
                        for (std::size_t s = 0; s < parents.size(); ++s) {
                            const index_t e = extents[s];
                            if (tp.needs_grad(parents[s])) {
                                Tensor gs(tp.value(parents[s]).shape);
                                for (index_t o = 0; o < o2; ++o)
                                    for (index_t k = 0; k < e; ++k)
                                        for (index_t in = 0; in < i2; ++in)
                                            gs.data[static_cast<std::size_t>((o * e + k) * i2 + in)] =
                                                g.data[static_cast<std::size_t>(
                                                    (o * total + off2 + k) * i2 + in)];
                                tp.accum_grad(parents[s], gs);
                            }
                            off2 += e;
                        }
                    });
}

// ---- fused kernels ----

Var pairwise_sqdist(Var x, Var y) {
    check_same_tape(x, y, "pairwise_sqdist");
    Tape& t = *x.tape;
    const Tensor& xv = t.value(x);
    const Tensor& yv = t.value(y);
    if (xv.rank() != 2 || yv.rank() != 2 || xv.extent(1) != yv.extent(1))
        throw std::invalid_argument("pairwise_sqdist: need [m,F] and [n,F], got " +
                                    shape_to_string(xv.shape) + " and " + shape_to_string(yv.shape));
    const index_t m = xv.extent(0), n = yv.extent(0), F = xv.extent(1);
    Tensor out({m, n});
    for (index_t i = 0; i < m; ++i)
        for (index_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (index_t f = 0; f < F; ++f) {
                const double d = xv.data[static_cast<std::size_t>(i * F + f)] -
                                 yv.data[static_cast<std::size_t>(j * F + f)];
                s += d * d;
            }
            out.data[static_cast<std::size_t>(i * n + j)] = s;
        }
    const int px = x.id, py = y.id;
    return t.record(std::move(out), {px, py}, [px, py](Tape& tp, int self) {
        const Tensor& g = tp.grad_ref(self);
        const Tensor& xv2 = tp.value(px);
        const Tensor& yv2 = tp.value(py);
        const index_t m2 = xv2.extent(0), n2 = yv2.extent(0), F2 = xv2.extent(1);
        const bool nx = tp.needs_grad(px), ny = tp.needs_grad(py);
        Tensor gx(xv2.shape), gy(yv2.shape);
        for (index_t i = 0; i < m2; ++i)
            for (index_t j = 0; j < n2; ++j) {
                const double gij = 2.0 * g.data[static_cast<std::size_t>(i * n2 + j)];
                if (gij == 0.0) continue;
                for (index_t f = 0; f < F2; ++f) {
                    const double d = xv2.data[static_cast<std::size_t>(i * F2 + f)] -
                                     yv2.data[static_cast<std::size_t>(j * F2 + f)];
                    if (nx) gx.data[static_cast<std::size_t>(i * F2 + f)] += gij * d;
                    if (ny) gy.data[static_cast<std::size_t>(j * F2 + f)] -= gij * d;
                }
            }
        if (nx) tp.accum_grad(px, gx);
        if (ny) tp.accum_grad(py, gy);
    });
}

Tensor lse_sub_scaled_forward(const Tensor& C, const Tensor& vv, double eps, index_t axis) {
    if (eps <= 0.0) throw std::invalid_argument("lse_sub_scaled: eps must be positive");
    if (axis != 0 && axis != 1) throw std::invalid_argument("lse_sub_scaled: axis must be 0 or 1");
    if (C.rank() != 2 || vv.rank() != 1)
        throw std::invalid_argument("lse_sub_scaled: need rank-2 cost and rank-1 potential, got " +
                                    shape_to_string(C.shape) + " and " + shape_to_string(vv.shape));
    const index_t n = C.extent(1);
    const index_t red = (axis == 1) ? n : C.extent(0);   // index being summed out
    const index_t keep = (axis == 1) ? C.extent(0) : n;  // index of the output
    if (vv.extent(0) != red)
        throw std::invalid_argument("lse_sub_scaled: potential length " + std::to_string(vv.extent(0)) +
                                    " does not match reduced extent " + std::to_string(red));
    Tensor out({keep});
    for (index_t a = 0; a < keep; ++a) {
        double mx = kNegInf;
        for (index_t r = 0; r < red; ++r) {
            const index_t i = (axis == 1) ? a : r;
            const index_t j = (axis == 1) ? r : a;
            const double z = (vv.data[static_cast<std::size_t>(r)] -
                              C.data[static_cast<std::size_t>(i * n + j)]) / eps;
            if (z > mx) mx = z;
        }
        double s = 0.0;
        for (index_t r = 0; r < red; ++r) {
            const index_t i = (axis == 1) ? a : r;
            const index_t j = (axis == 1) ? r : a;
            const double z = (vv.data[static_cast<std::size_t>(r)] -
                              C.data[static_cast<std::size_t>(i * n + j)]) / eps;
            s += std::exp(z - mx);
        }
        out.data[static_cast<std::size_t>(a)] = mx + std::log(s);
    }
    return out;
}

Var lse_sub_scaled(Var cost, Var v, double eps, index_t axis) {
    check_same_tape(cost, v, "lse_sub_scaled");
    Tape& t = *cost.tape;
    Tensor out = lse_sub_scaled_forward(t.value(cost), t.value(v), eps, axis);
    const int pc = cost.id, pv = v.id;
    return t.record(std::move(out), {pc, pv}, [pc, pv, eps, axis](Tape& tp, int self) {
        const Tensor& g = tp.grad_ref(self);
        const Tensor& C2 = tp.value(pc);
        const Tensor& vv2 = tp.value(pv);
        const Tensor& u = tp.value(self);
        const index_t m2 = C2.extent(0), n2 = C2.extent(1);
        const index_t red = (axis == 1) ? n2 : m2;
        const index_t keep = (axis == 1) ? m2 : n2;
        const bool nc = tp.needs_grad(pc), nv = tp.needs_grad(pv);
        Tensor gC(C2.shape), gv(vv2.shape);
        for (index_t a = 0; a < keep; ++a) {
            const double ga = g.data[static_cast<std::size_t>(a)];
            if (ga == 0.0) continue;
            const double ua = u.data[static_cast<std::size_t>(a)];
            for (index_t r = 0; r < red; ++r) {
                const index_t i = (axis == 1) ? a : r;
                const index_t j = (axis == 1) ? r : a;
                const double z = (vv2.data[static_cast<std::size_t>(r)] -
                                  C2.data[static_cast<std::size_t>(i * n2 + j)]) / eps;
                const double p = std::exp(z - ua);  // softmax weight, rows sum to 1
                const double w = ga * p / eps;
                if (nv) gv.data[static_cast<std::size_t>(r)] += w;
                if (nc) gC.data[static_cast<std::size_t>(i * n2 + j)] -= w;
            }
        }
        if (nc) tp.accum_grad(pc, gC);
        if (nv) tp.accum_grad(pv, gv);
    });
}

Var causal_conv1d(Var x, Var w, Var b) {
    check_same_tape(x, w, "causal_conv1d");
    check_same_tape(x, b, "causal_conv1d");
    Tape& t = *x.tape;
    const Tensor& X = t.value(x);
    const Tensor& W = t.value(w);
    const Tensor& B = t.value(b);
    if (X.rank() != 3 || W.rank() != 3 || B.rank() != 1)
        throw std::invalid_argument("causal_conv1d: need X:[m,T,Cin] W:[Cout,Cin,K] b:[Cout], got " +
                                    shape_to_string(X.shape) + ", " + shape_to_string(W.shape) +
                                    ", " + shape_to_string(B.shape));
    const index_t m = X.extent(0), T = X.extent(1), Cin = X.extent(2);
    const index_t Cout = W.extent(0), K = W.extent(2);
    if (W.extent(1) != Cin || B.extent(0) != Cout)
        throw std::invalid_argument("causal_conv1d: channel mismatch between X " +
                                    shape_to_string(X.shape) + " and W " + shape_to_string(W.shape));
    Tensor out({m, T, Cout});
    for (index_t i = 0; i < m; ++i)
        for (index_t tt = 0; tt < T; ++tt)
            for (index_t o = 0; o < Cout; ++o) {
                double s = B.data[static_cast<std::size_t>(o)];
                for (index_t k = 0; k < K; ++k) {
                    const index_t src = tt - (K - 1) + k;
                    if (src < 0) continue;
                    for (index_t c = 0; c < Cin; ++c)
                        s += W.data[static_cast<std::size_t>((o * Cin + c) * K + k)] *
                             X.data[static_cast<std::size_t>((i * T + src) * Cin + c)];
                }
                out.data[static_cast<std::size_t>((i * T + tt) * Cout + o)] = s;
            }
    const int px = x.id, pw = w.id, pb = b.id;
    return t.record(std::move(out), {px, pw, pb}, [px, pw, pb](Tape& tp, int self) {
        const Tensor& g = tp.grad_ref(self);
        const Tensor& X2 = tp.value(px);
        const Tensor& W2 = tp.value(pw);
        const index_t m2 = X2.extent(0), T2 = X2.extent(1), Cin2 = X2.extent(2);
        const index_t Cout2 = W2.extent(0), K2 = W2.extent(2);
        const bool nx = tp.needs_grad(px), nw = tp.needs_grad(pw), nb = tp.needs_grad(pb);
        Tensor gX(X2.shape), gW(W2.shape), gB(tp.value(pb).shape);
        for (index_t i = 0; i < m2; ++i)
            for (index_t tt = 0; tt < T2; ++tt)
                for (index_t o = 0; o < Cout2; ++o) {
                    const double go = g.data[static_cast<std::size_t>((i * T2 + tt) * Cout2 + o)];
                    if (go == 0.0) continue;
                    if (nb) gB.data[static_cast<std::size_t>(o)] += go;
                    for (index_t k = 0; k < K2; ++k) {
                        const index_t src = tt - (K2 - 1) + k;
                        if (src < 0) continue;
                        for (index_t c = 0; c < Cin2; ++c) {
                            const std::size_t wi = static_cast<std::size_t>((o * Cin2 + c) * K2 + k);
                            const std::size_t xi = static_cast<std::size_t>((i * T2 + src) * Cin2 + c);
                            if (nx) gX.data[xi] += go * W2.data[wi];
                            if (nw) gW.data[wi] += go * X2.data[xi];
                        }
                    }
                }
        if (nx) tp.accum_grad(px, gX);
        if (nw) tp.accum_grad(pw, gW);
        if (nb) tp.accum_grad(pb, gB);
    });
}

}  // namespace cotgan
