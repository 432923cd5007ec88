#pragma once

#include <string>

#include "cotgan/sequence.hpp"
#include "cotgan/tape.hpp"
#include "cotgan/tensor.hpp"

namespace cotgan {

enum class BaseCost;

// Mini-batch divergence estimators built on Sinkhorn values. The paired kinds
// (Mixed4, Variant3, Variant6, Variant8, MmdUnbiased) need a second
// mini-batch per distribution; the others ignore the primed arguments.
enum class DivergenceKind {
    Sharp,
    Sinkhorn2Term,
    Variant3,
    Mixed4,
    Variant6,
    Variant8,
    MmdBiased,
    MmdUnbiased,
};

const char* divergence_name(DivergenceKind kind);
DivergenceKind parse_divergence_kind(const std::string& name);
bool divergence_needs_pair(DivergenceKind kind);

// W_{c,eps}(x, y): the sharp transport term <pi, C> of an entropic plan from
// a fixed-iteration Sinkhorn run with uniform marginals.
double sharp_distance(const SequenceBatch& x, const SequenceBatch& y, BaseCost base, double eps,
                      index_t iters);

// Evaluates `kind` on up to four mini-batches of equal size. Every W term
// shares base, eps, and iters. Terms accumulate as (cross - within) pairs in
// a fixed order, so configurations whose terms cancel pairwise (all four
// batches identical) give exactly zero. eps and iters are ignored by the MMD
// kinds, which are the eps -> infinity limits.
double divergence(DivergenceKind kind, const SequenceBatch& x, const SequenceBatch& y,
                  const SequenceBatch* x_prime, const SequenceBatch* y_prime, BaseCost base,
                  double eps, index_t iters);

// Convenience form for the single-batch kinds.
double divergence(DivergenceKind kind, const SequenceBatch& x, const SequenceBatch& y,
                  BaseCost base, double eps, index_t iters);

// The eps -> infinity limits: squared MMD with kernel -c. Biased uses one
// batch per distribution, unbiased needs the primed pair.
double mmd_estimate(DivergenceKind kind, const SequenceBatch& x, const SequenceBatch& y,
                    const SequenceBatch* x_prime, const SequenceBatch* y_prime, BaseCost base);

// Differentiable sharp Sinkhorn value on a cost matrix already recorded on a
// tape: unrolls `iters` update sweeps and returns <pi, C> as a scalar node,
// so gradients flow through every iteration. Produces bit for bit the
// sharp_value of the plain solver on the same inputs.
Var sinkhorn_sharp(Var cost, const Tensor& a, const Tensor& b, double eps, index_t iters);

}  // namespace cotgan
