#pragma once

#include <vector>

namespace cotgan {

// min cost.x  s.t.  A x = rhs, x >= 0.
// Dense two-phase tableau simplex with Bland's rule (no cycling). Redundant
// equality rows are detected in phase one and dropped. Sized for the tiny
// transportation instances the exact oracles need, not for general LP work.
struct SimplexResult {
    double value = 0.0;
    std::vector<double> x;
};

// Throws std::runtime_error if the program is infeasible.
SimplexResult solve_equality_lp(const std::vector<std::vector<double>>& A,
                                const std::vector<double>& rhs,
                                const std::vector<double>& cost);

}  // namespace cotgan
