#pragma once

#include <functional>
#include <vector>

#include "cotgan/tensor.hpp"

namespace cotgan {

class Tape;

// Lightweight handle to a node on a tape. Copyable, trivially cheap.
struct Var {
    Tape* tape = nullptr;
    int id = -1;
    bool valid() const { return tape != nullptr && id >= 0; }
};

// Reverse-mode tape. Nodes are appended in evaluation order, so inputs always
// reference earlier nodes and the backward sweep visits each node exactly once
// in reverse id order. Tensors recorded on the tape are immutable; gradients
// are accumulated lazily (a node never touched by the sweep reports an exact
// zero gradient).
class Tape {
public:
    using BackFn = std::function<void(Tape&, int)>;

    Var leaf(Tensor value);      // differentiable input
    Var constant(Tensor value);  // non-differentiable input

    const Tensor& value(Var v) const;
    const Tensor& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    double scalar_value(Var v) const;

    // Gradient of the last backward() output w.r.t. v; zeros if v was not on
    // any path to the output.
    Tensor grad(Var v) const;

    // Runs the reverse sweep from a scalar output. Throws std::invalid_argument
    // if `output` is not scalar.
    void backward(Var output);

    void clear() { nodes_.clear(); }
    std::size_t size() const { return nodes_.size(); }

    // -- recording interface used by the ops below --
    Var record(Tensor value, std::vector<int> parents, BackFn fn);
    bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }
    void accum_grad(int id, const Tensor& g);
    const Tensor& grad_ref(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
    bool grad_touched(int id) const { return !nodes_[static_cast<std::size_t>(id)].grad.data.empty(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;  // empty vector = never touched
        std::vector<int> parents;
        BackFn backward;
        bool needs_grad = false;
    };
    std::vector<Node> nodes_;
};

// Elementwise with broadcasting of singleton axes.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);      // IEEE semantics; division by zero is not trapped
Var maximum(Var a, Var b);  // ties route the gradient to the first argument

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

// Elementwise unary.
Var exp(Var x);
Var log(Var x);  // throws on negative inputs; log(0) = -inf is permitted
Var tanh(Var x);
Var sigmoid(Var x);
Var relu(Var x);   // derivative 1 at 0 (max-with-zero, first-argument tie rule)
Var abs(Var x);    // derivative +1 at 0, same convention
Var sqrt(Var x);

Var scale(Var x, double k);
Var add_scalar(Var x, double c);

Var matmul(Var a, Var b);  // [p,q] x [q,r]

// Reductions. The reduced axis is removed from the shape (a full reduction
// yields shape [1]). logsumexp subtracts the per-slice max, so the result is
// finite whenever any input along the axis is finite.
Var logsumexp(Var x, index_t axis);
Var sum(Var x, index_t axis);
Var mean(Var x, index_t axis);
Var sum_all(Var x);
Var mean_all(Var x);

Var reshape(Var x, Shape new_shape);
Var transpose(Var x);  // rank-2 only
Var slice(Var x, index_t axis, index_t start, index_t len);
Var concat(const std::vector<Var>& xs, index_t axis);

// C[i,j] = sum_f (X[i,f] - Y[j,f])^2 for X:[m,F], Y:[n,F].
Var pairwise_sqdist(Var x, Var y);

// Fused Sinkhorn half-step kernel.
//   axis == 1: u[i] = logsumexp_j((v[j] - C[i,j]) / eps), v of length n
//   axis == 0: u[j] = logsumexp_i((v[i] - C[i,j]) / eps), v of length m
Var lse_sub_scaled(Var cost, Var v, double eps, index_t axis);

// The same computation without a tape; the recorded op calls this, so the
// differentiating and plain solver paths agree bit for bit.
Tensor lse_sub_scaled_forward(const Tensor& cost, const Tensor& v, double eps, index_t axis);

// 1-D causal convolution over time. X:[m,T,Cin], W:[Cout,Cin,K], b:[Cout]
// -> [m,T,Cout]. Left-padded with K-1 zeros: the output at time t reads
// inputs at times t-K+1..t only, never the future.
Var causal_conv1d(Var x, Var w, Var b);

}  // namespace cotgan
