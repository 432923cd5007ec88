#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cotgan/rng.hpp"
#include "cotgan/sequence.hpp"
#include "cotgan/tape.hpp"
#include "cotgan/tensor.hpp"

namespace cotgan {

enum class HeadKind { Linear, Sigmoid, Tanh };

const char* head_name(HeadKind kind);
HeadKind parse_head_kind(const std::string& name);

// Adapted trace network: two causal convolutions (filter length 5, left
// padding, relu) and a per-step linear map to trace_dim channels under the
// head activation. The output at time t never reads inputs after t. One
// network carries all trace channels; channel j is the j-th scalar trace.
struct TraceNetParams {
    Tensor conv1_w;  // [hidden, d, 5]
    Tensor conv1_b;  // [hidden]
    Tensor conv2_w;  // [hidden, hidden, 5]
    Tensor conv2_b;  // [hidden]
    Tensor head_w;   // [trace_dim, hidden, 1]
    Tensor head_b;   // [trace_dim]
    HeadKind head = HeadKind::Linear;

    index_t input_dim() const { return conv1_w.extent(1); }
    index_t hidden_dim() const { return conv1_w.extent(0); }
    index_t trace_dim() const { return head_b.extent(0); }
};

// Weights uniform in +-1/sqrt(fan-in), biases zero.
TraceNetParams init_trace_net(index_t d, index_t hidden, index_t trace_dim, HeadKind head,
                              Rng& rng);

// Mutable views in a fixed order, for optimizer updates and checkpoints.
std::vector<std::pair<std::string, Tensor*>> named_parameters(TraceNetParams& p);

// The full cost family: h feeds the assembly from the column batch, m from
// the row batch, eta floors the penalty denominator.
struct CausalCostParams {
    TraceNetParams h_net;
    TraceNetParams m_net;
    double eta = 1e-6;
};

CausalCostParams init_causal_cost(index_t d, index_t hidden, index_t trace_dim, HeadKind head,
                                  double eta, Rng& rng);
std::vector<std::pair<std::string, Tensor*>> named_parameters(CausalCostParams& p);

struct TraceNetVars {
    Var conv1_w, conv1_b, conv2_w, conv2_b, head_w, head_b;
    HeadKind head = HeadKind::Linear;
};

// Registers every parameter as a differentiable leaf on the tape.
TraceNetVars trace_net_leaves(Tape& tape, const TraceNetParams& p);

// [m,T,d] -> [m,T,trace_dim] traces.
Var causal_forward(const TraceNetVars& net, Var batch);
Tensor causal_forward(const TraceNetParams& net, const SequenceBatch& batch);

// C[i,j] = base[i,j] + sum_{t=0}^{T-2} sum_k h[j,t,k] * (M[i,t+1,k] - M[i,t,k]).
// h traces come from the column batch, M traces from the row batch; the
// result can be negative, which the solvers accept. The tensor and tape
// overloads produce bit-identical values.
Tensor assemble_causal_cost(const Tensor& base, const Tensor& h_traces, const Tensor& m_traces);
Var assemble_causal_cost(Var base, Var h_traces, Var m_traces);

// <plan, assembled - base>: what the coupling pays the causality terms.
double causality_violation(const Tensor& plan, const Tensor& h_traces, const Tensor& m_traces);

struct PenaltyReport {
    double value = 0.0;
    Tensor contributions;  // [trace_dim, T-1]: |scaled batch sum| per channel and step
                           // (left empty when T == 1, there are no increments)
    Tensor variance;       // [trace_dim]: empirical variance over batch and time
};

// p = (1/(mT)) sum_{j,t} |sum_i dM[i,t,j] / (sqrt(var_j) + eta)|. The two
// overloads mirror each other operation for operation and agree bitwise.
PenaltyReport martingale_penalty(const Tensor& m_traces, double eta);
Var martingale_penalty(Var m_traces, double eta);

}  // namespace cotgan
