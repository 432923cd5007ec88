#pragma once

#include <string>
#include <vector>

#include "cotgan/sequence.hpp"
#include "cotgan/tensor.hpp"

namespace cotgan {

enum class BaseCost { SquaredL2, L1 };

// C[i,j] = sum_{t,k} |X[i,t,k] - Y[j,t,k]|^p with p = 2 (SquaredL2) or 1 (L1).
Tensor pairwise_cost(const SequenceBatch& x, const SequenceBatch& y,
                     BaseCost kind = BaseCost::SquaredL2);

double cost_mean(const Tensor& cost);

// -sum pi log pi with 0 log 0 = 0.
double entropy(const Tensor& plan);

// Max over the two marginals of the L1 deviation from a and b.
double marginal_violation(const Tensor& plan, const Tensor& a, const Tensor& b);

Tensor uniform_weights(index_t n);

struct SinkhornResult {
    Tensor f;  // [m] row potential
    Tensor g;  // [n] col potential
    Tensor plan;
    double entropic_value = 0.0;  // E^pi[c] - eps H(pi)
    double sharp_value = 0.0;     // <pi, C>
    index_t iterations = 0;
    double violation = 0.0;
};

// Log-domain Sinkhorn with marginal-absorbing potentials, run for exactly
// `iters` full sweeps from f = g = 0:
//   f_i <- eps log a_i - eps lse_j((g_j - C_ij)/eps)
//   g_j <- eps log b_j - eps lse_i((f_i - C_ij)/eps)
// and plan pi_ij = exp((f_i + g_j - C_ij)/eps). After the g update the column
// marginals hold exactly; the reported violation is then the row residual.
// Signed cost entries are accepted (perturbed costs c + l arise in the
// test-function reformulation); NaN anywhere mid-iteration is an error
// carrying the iteration index.
SinkhornResult sinkhorn(const Tensor& cost, const Tensor& a, const Tensor& b, double eps,
                        index_t iters);

struct LpResult {
    double value = 0.0;
    Tensor plan;
};

// Exact transportation LP. Vertex enumeration up to 3x3, dense two-phase
// simplex beyond; `force_simplex` pins the simplex path for cross-checks.
LpResult exact_ot_lp(const Tensor& cost, const Tensor& a, const Tensor& b,
                     bool force_simplex = false);

// Finitely supported path law: n atoms of shape [n, T, d] with strictly
// positive weights summing to one. Atom prefixes are compared by exact value.
struct DiscretePathMeasure {
    SequenceBatch atoms;
    Tensor weights;
};

DiscretePathMeasure uniform_path_measure(SequenceBatch atoms);

// One linear functional per (t, y-prefix class, x-prefix class): the
// martingale increment of the x-prefix indicator times the y-prefix
// indicator. Every functional vanishes identically on mu x nu.
struct CausalConstraint {
    index_t t = 0;  // conditioning time, 1-based as in h_t
    Tensor coeffs;  // [m, n]
};

struct CausalConstraintSet {
    index_t m = 0;  // x atoms
    index_t n = 0;  // y atoms
    std::vector<CausalConstraint> items;
};

CausalConstraintSet causal_constraints(const DiscretePathMeasure& mu, const SequenceBatch& y_atoms);

struct CausalityCheck {
    bool causal = false;
    double max_violation = 0.0;
};

CausalityCheck is_causal(const Tensor& plan, const CausalConstraintSet& constraints, double tol);

// Exact causal OT value K_c: the transportation LP with the causality
// equalities appended.
LpResult exact_causal_lp(const Tensor& cost, const DiscretePathMeasure& mu,
                         const DiscretePathMeasure& nu);

struct CausalEntropicResult {
    Tensor plan;
    double entropic_value = 0.0;  // P^K_{c,eps}
    double sharp_value = 0.0;     // K_{c,eps} = E^pi[c]
    index_t sweeps = 0;
    double max_violation = 0.0;   // marginal L1 and causal functionals combined
    std::vector<double> multipliers;  // accumulated log-domain constraint steps
};

// Entropic causal OT by cyclic KL projections in the log domain: marginal
// projections are Sinkhorn half-steps, each causality equality is a 1-D
// exponential tilt solved by safeguarded Newton. Equivalent to dual ascent
// on the constraint multipliers, with each coordinate maximized exactly.
// Converged when the objective moves less than tol over a sweep and every
// violation is below tol; otherwise throws after max_sweeps carrying the
// final violation.
CausalEntropicResult entropic_causal_solve(const Tensor& cost, const DiscretePathMeasure& mu,
                                           const DiscretePathMeasure& nu, double eps,
                                           index_t max_sweeps, double tol);

}  // namespace cotgan
