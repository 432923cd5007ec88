#include "cotgan/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cotgan/simplex.hpp"
#include "cotgan/tape.hpp"

namespace cotgan {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Tensor pairwise_cost(const SequenceBatch& x, const SequenceBatch& y, BaseCost kind) {
    if (x.T != y.T || x.d != y.d)
        throw std::invalid_argument("pairwise_cost: batches disagree on T or d: [" +
                                    std::to_string(x.T) + "," + std::to_string(x.d) + "] vs [" +
                                    std::to_string(y.T) + "," + std::to_string(y.d) + "]");
    const index_t m = x.m, n = y.m, F = x.T * x.d;
    Tensor out({m, n});
    for (index_t i = 0; i < m; ++i)
        for (index_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (index_t f = 0; f < F; ++f) {
                const double d = x.values.data[static_cast<std::size_t>(i * F + f)] -
                                 y.values.data[static_cast<std::size_t>(j * F + f)];
                s += kind == BaseCost::SquaredL2 ? d * d : std::abs(d);
            }
            out.at(i, j) = s;
        }
    return out;
}

double cost_mean(const Tensor& cost) {
    double s = 0.0;
    for (double v : cost.data) s += v;
    return s / static_cast<double>(cost.size());
}

double entropy(const Tensor& plan) {
    double h = 0.0;
    for (double p : plan.data)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

double marginal_violation(const Tensor& plan, const Tensor& a, const Tensor& b) {
    const index_t m = plan.extent(0), n = plan.extent(1);
    double row = 0.0, col = 0.0;
    for (index_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (index_t j = 0; j < n; ++j) s += plan.at(i, j);
        row += std::abs(s - a[i]);
    }
    for (index_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (index_t i = 0; i < m; ++i) s += plan.at(i, j);
        col += std::abs(s - b[j]);
    }
    return std::max(row, col);
}

Tensor uniform_weights(index_t n) {
    if (n <= 0) throw std::invalid_argument("uniform_weights: n must be positive");
    return Tensor::full({n}, 1.0 / static_cast<double>(n));
}

namespace {

void check_marginal(const Tensor& w, index_t len, const char* name, const char* fn) {
    if (w.rank() != 1 || w.extent(0) != len)
        throw std::invalid_argument(std::string(fn) + ": " + name + " must have length " +
                                    std::to_string(len) + ", got shape " + shape_to_string(w.shape));
    double s = 0.0;
    for (double v : w.data) {
        if (!(v > 0.0))
            throw std::invalid_argument(std::string(fn) + ": " + name +
                                        " must be strictly positive");
        s += v;
    }
    if (std::abs(s - 1.0) > 1e-9)
        throw std::invalid_argument(std::string(fn) + ": " + name + " sums to " +
                                    std::to_string(s) + ", expected 1");
}

}  // namespace

SinkhornResult sinkhorn(const Tensor& cost, const Tensor& a, const Tensor& b, double eps,
                        index_t iters) {
    if (cost.rank() != 2)
        throw std::invalid_argument("sinkhorn: cost must be a matrix, got " +
                                    shape_to_string(cost.shape));
    if (eps <= 0.0) throw std::invalid_argument("sinkhorn: eps must be positive");
    if (iters < 1) throw std::invalid_argument("sinkhorn: iteration count must be >= 1");
    if (!cost.all_finite()) throw std::invalid_argument("sinkhorn: cost has non-finite entries");
    const index_t m = cost.extent(0), n = cost.extent(1);
    check_marginal(a, m, "a", "sinkhorn");
    check_marginal(b, n, "b", "sinkhorn");

    Tensor f({m}), g({n});
    for (index_t it = 1; it <= iters; ++it) {
        Tensor u = lse_sub_scaled_forward(cost, g, eps, 1);
        for (index_t i = 0; i < m; ++i) f[i] = eps * std::log(a[i]) - eps * u[i];
        Tensor w = lse_sub_scaled_forward(cost, f, eps, 0);
        for (index_t j = 0; j < n; ++j) g[j] = eps * std::log(b[j]) - eps * w[j];
        for (index_t i = 0; i < m; ++i)
            if (std::isnan(f[i]))
                throw std::runtime_error("sinkhorn: NaN in row potential at iteration " +
                                         std::to_string(it));
        for (index_t j = 0; j < n; ++j)
            if (std::isnan(g[j]))
                throw std::runtime_error("sinkhorn: NaN in col potential at iteration " +
                                         std::to_string(it));
    }

    SinkhornResult res;
    res.plan = Tensor({m, n});
    const double inv_eps = 1.0 / eps;
    double sharp = 0.0;
    for (index_t i = 0; i < m; ++i)
        for (index_t j = 0; j < n; ++j) {
            const double p = std::exp((f[i] + g[j] - cost.at(i, j)) * inv_eps);
            res.plan.at(i, j) = p;
            sharp += p * cost.at(i, j);
        }
    res.f = std::move(f);
    res.g = std::move(g);
    res.sharp_value = sharp;
    res.entropic_value = sharp - eps * entropy(res.plan);
    res.iterations = iters;
    res.violation = marginal_violation(res.plan, a, b);
    return res;
}

// ---- exact transportation LP ----

namespace {

// Gaussian elimination with partial pivoting on an r x r system stored row
// major. Returns false when numerically singular.
bool solve_dense(std::vector<double>& M, std::vector<double>& rhs, int r) {
    for (int c = 0; c < r; ++c) {
        int piv = c;
        for (int i = c + 1; i < r; ++i)
            if (std::abs(M[static_cast<std::size_t>(i * r + c)]) >
                std::abs(M[static_cast<std::size_t>(piv * r + c)]))
                piv = i;
        if (std::abs(M[static_cast<std::size_t>(piv * r + c)]) < 1e-11) return false;
        if (piv != c) {
            for (int j = 0; j < r; ++j)
                std::swap(M[static_cast<std::size_t>(c * r + j)], M[static_cast<std::size_t>(piv * r + j)]);
            std::swap(rhs[static_cast<std::size_t>(c)], rhs[static_cast<std::size_t>(piv)]);
        }
        const double d = M[static_cast<std::size_t>(c * r + c)];
        for (int i = c + 1; i < r; ++i) {
            const double fct = M[static_cast<std::size_t>(i * r + c)] / d;
            if (fct == 0.0) continue;
            for (int j = c; j < r; ++j)
                M[static_cast<std::size_t>(i * r + j)] -= fct * M[static_cast<std::size_t>(c * r + j)];
            rhs[static_cast<std::size_t>(i)] -= fct * rhs[static_cast<std::size_t>(c)];
        }
    }
    for (int i = r - 1; i >= 0; --i) {
        double s = rhs[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < r; ++j)
            s -= M[static_cast<std::size_t>(i * r + j)] * rhs[static_cast<std::size_t>(j)];
        rhs[static_cast<std::size_t>(i)] = s / M[static_cast<std::size_t>(i * r + i)];
    }
    return true;
}

// Rows of the transportation equality system: m row sums then n col sums.
void marginal_rows(index_t m, index_t n, std::vector<std::vector<double>>& A,
                   std::vector<double>& rhs, const Tensor& a, const Tensor& b) {
    const index_t N = m * n;
    for (index_t i = 0; i < m; ++i) {
        std::vector<double> row(static_cast<std::size_t>(N), 0.0);
        for (index_t j = 0; j < n; ++j) row[static_cast<std::size_t>(i * n + j)] = 1.0;
        A.push_back(std::move(row));
        rhs.push_back(a[i]);
    }
    for (index_t j = 0; j < n; ++j) {
        std::vector<double> row(static_cast<std::size_t>(N), 0.0);
        for (index_t i = 0; i < m; ++i) row[static_cast<std::size_t>(i * n + j)] = 1.0;
        A.push_back(std::move(row));
        rhs.push_back(b[j]);
    }
}

LpResult transportation_vertices(const Tensor& cost, const Tensor& a, const Tensor& b) {
    const index_t m = cost.extent(0), n = cost.extent(1);
    const int N = static_cast<int>(m * n);
    const int R = static_cast<int>(m + n - 1);  // rank of the marginal system
    std::vector<int> cols(static_cast<std::size_t>(R));
    for (int i = 0; i < R; ++i) cols[static_cast<std::size_t>(i)] = i;
    double best = kInf;
    std::vector<double> best_x;
    std::vector<double> M, rhs;
    while (true) {
        M.assign(static_cast<std::size_t>(R * R), 0.0);
        rhs.assign(static_cast<std::size_t>(R), 0.0);
        // Equation rows: all m row sums plus the first n-1 col sums.
        for (int r = 0; r < R; ++r) {
            for (int ci = 0; ci < R; ++ci) {
                const int v = cols[static_cast<std::size_t>(ci)];
                const index_t i = v / n, j = v % n;
                const bool hit = r < static_cast<int>(m) ? (static_cast<int>(i) == r)
                                                         : (static_cast<int>(j) == r - static_cast<int>(m));
                M[static_cast<std::size_t>(r * R + ci)] = hit ? 1.0 : 0.0;
            }
            rhs[static_cast<std::size_t>(r)] =
                r < static_cast<int>(m) ? a[r] : b[r - static_cast<int>(m)];
        }
        if (solve_dense(M, rhs, R)) {
            bool ok = true;
            for (double v : rhs)
                if (v < -1e-12) ok = false;
            if (ok) {
                // Verify the dropped column equation too.
                double last = 0.0;
                for (int ci = 0; ci < R; ++ci)
                    if (cols[static_cast<std::size_t>(ci)] % static_cast<int>(n) == static_cast<int>(n) - 1)
                        last += rhs[static_cast<std::size_t>(ci)];
                if (std::abs(last - b[n - 1]) < 1e-9) {
                    double val = 0.0;
                    for (int ci = 0; ci < R; ++ci)
                        val += cost[cols[static_cast<std::size_t>(ci)]] * rhs[static_cast<std::size_t>(ci)];
                    if (val < best) {
                        best = val;
                        best_x.assign(static_cast<std::size_t>(N), 0.0);
                        for (int ci = 0; ci < R; ++ci)
                            best_x[static_cast<std::size_t>(cols[static_cast<std::size_t>(ci)])] =
                                std::max(rhs[static_cast<std::size_t>(ci)], 0.0);
                    }
                }
            }
        }
        // next combination
        int k = R - 1;
        while (k >= 0 && cols[static_cast<std::size_t>(k)] == N - R + k) --k;
        if (k < 0) break;
        ++cols[static_cast<std::size_t>(k)];
        for (int j = k + 1; j < R; ++j)
            cols[static_cast<std::size_t>(j)] = cols[static_cast<std::size_t>(j - 1)] + 1;
    }
    if (!std::isfinite(best))
        throw std::runtime_error("exact_ot_lp: vertex enumeration found no feasible basis (internal)");
    LpResult res;
    res.value = best;
    res.plan = Tensor({m, n}, std::move(best_x));
    return res;
}

void check_lp_inputs(const Tensor& cost, const Tensor& a, const Tensor& b, const char* fn) {
    if (cost.rank() != 2)
        throw std::invalid_argument(std::string(fn) + ": cost must be a matrix");
    const index_t m = cost.extent(0), n = cost.extent(1);
    if (a.rank() != 1 || a.extent(0) != m || b.rank() != 1 || b.extent(0) != n)
        throw std::invalid_argument(std::string(fn) + ": marginal shapes do not match cost " +
                                    shape_to_string(cost.shape));
    double sa = 0.0, sb = 0.0;
    for (double v : a.data) {
        if (v < 0.0) throw std::invalid_argument(std::string(fn) + ": negative marginal entry");
        sa += v;
    }
    for (double v : b.data) {
        if (v < 0.0) throw std::invalid_argument(std::string(fn) + ": negative marginal entry");
        sb += v;
    }
    if (std::abs(sa - sb) > 1e-12)
        throw std::invalid_argument(std::string(fn) + ": marginal sums differ: " +
                                    std::to_string(sa) + " vs " + std::to_string(sb));
}

}  // namespace

LpResult exact_ot_lp(const Tensor& cost, const Tensor& a, const Tensor& b, bool force_simplex) {
    check_lp_inputs(cost, a, b, "exact_ot_lp");
    const index_t m = cost.extent(0), n = cost.extent(1);
    if (!force_simplex && m <= 3 && n <= 3) return transportation_vertices(cost, a, b);
    std::vector<std::vector<double>> A;
    std::vector<double> rhs;
    marginal_rows(m, n, A, rhs, a, b);
    SimplexResult s = solve_equality_lp(A, rhs, cost.data);
    LpResult res;
    res.value = s.value;
    res.plan = Tensor({m, n}, std::move(s.x));
    return res;
}

// ---- causality constraints ----

namespace {

// Classes of equal length-t prefixes, by exact comparison of the first t*d
// values of each atom. Returns per-atom class ids, 0..(#classes-1), in first-
// appearance order.
std::vector<int> prefix_classes(const SequenceBatch& atoms, index_t t) {
    const index_t len = t * atoms.d;
    std::vector<int> cls(static_cast<std::size_t>(atoms.m), -1);
    int next = 0;
    for (index_t i = 0; i < atoms.m; ++i) {
        if (cls[static_cast<std::size_t>(i)] >= 0) continue;
        cls[static_cast<std::size_t>(i)] = next;
        for (index_t j = i + 1; j < atoms.m; ++j) {
            if (cls[static_cast<std::size_t>(j)] >= 0) continue;
            bool eq = true;
            for (index_t k = 0; k < len && eq; ++k)
                eq = atoms.values.data[static_cast<std::size_t>(i * atoms.T * atoms.d + k)] ==
                     atoms.values.data[static_cast<std::size_t>(j * atoms.T * atoms.d + k)];
            if (eq) cls[static_cast<std::size_t>(j)] = next;
        }
        ++next;
    }
    return cls;
}

void check_measure(const DiscretePathMeasure& mu, const char* name, const char* fn) {
    if (mu.atoms.m <= 0)
        throw std::invalid_argument(std::string(fn) + ": " + name + " has no atoms");
    check_marginal(mu.weights, mu.atoms.m, name, fn);
}

}  // namespace

DiscretePathMeasure uniform_path_measure(SequenceBatch atoms) {
    DiscretePathMeasure mu;
    mu.weights = uniform_weights(atoms.m);
    mu.atoms = std::move(atoms);
    return mu;
}

CausalConstraintSet causal_constraints(const DiscretePathMeasure& mu, const SequenceBatch& y_atoms) {
    check_measure(mu, "mu", "causal_constraints");
    if (y_atoms.m <= 0) throw std::invalid_argument("causal_constraints: no y atoms");
    if (mu.atoms.T != y_atoms.T)
        throw std::invalid_argument("causal_constraints: x and y atoms disagree on T: " +
                                    std::to_string(mu.atoms.T) + " vs " + std::to_string(y_atoms.T));
    const index_t m = mu.atoms.m, n = y_atoms.m, T = mu.atoms.T;
    CausalConstraintSet set;
    set.m = m;
    set.n = n;
    for (index_t t = 1; t <= T - 1; ++t) {
        const std::vector<int> ycls = prefix_classes(y_atoms, t);
        const std::vector<int> xcur = prefix_classes(mu.atoms, t);
        const std::vector<int> xnext = prefix_classes(mu.atoms, t + 1);
        const int ny = 1 + *std::max_element(ycls.begin(), ycls.end());
        const int nq = 1 + *std::max_element(xnext.begin(), xnext.end());

        for (int q = 0; q < nq; ++q) {
            // Mass of the length-(t+1) class and of its length-t parent.
            double wq = 0.0, wp = 0.0;
            int parent = -1;
            for (index_t i = 0; i < m; ++i)
                if (xnext[static_cast<std::size_t>(i)] == q) {
                    wq += mu.weights[i];
                    parent = xcur[static_cast<std::size_t>(i)];
                }
            if (wq <= 0.0 || parent < 0) continue;  // null conditioning prefix: skip
            for (index_t i = 0; i < m; ++i)
                if (xcur[static_cast<std::size_t>(i)] == parent) wp += mu.weights[i];
            if (wp <= 0.0) continue;

            // Martingale increment of the indicator of class q.
            std::vector<double> dm(static_cast<std::size_t>(m), 0.0);
            bool nonzero = false;
            for (index_t i = 0; i < m; ++i) {
                double v = 0.0;
                if (xnext[static_cast<std::size_t>(i)] == q) v += 1.0;
                if (xcur[static_cast<std::size_t>(i)] == parent) v -= wq / wp;
                dm[static_cast<std::size_t>(i)] = v;
                nonzero = nonzero || std::abs(v) > 1e-15;
            }
            if (!nonzero) continue;  // q is its parent's only continuation

            for (int h = 0; h < ny; ++h) {
                CausalConstraint con;
                con.t = t;
                con.coeffs = Tensor({m, n});
                for (index_t i = 0; i < m; ++i)
                    for (index_t j = 0; j < n; ++j)
                        if (ycls[static_cast<std::size_t>(j)] == h)
                            con.coeffs.at(i, j) = dm[static_cast<std::size_t>(i)];
                set.items.push_back(std::move(con));
            }
        }
    }
    return set;
}

CausalityCheck is_causal(const Tensor& plan, const CausalConstraintSet& constraints, double tol) {
    if (plan.rank() != 2 || plan.extent(0) != constraints.m || plan.extent(1) != constraints.n)
        throw std::invalid_argument("is_causal: plan shape " + shape_to_string(plan.shape) +
                                    " does not match constraint grid [" +
                                    std::to_string(constraints.m) + "," +
                                    std::to_string(constraints.n) + "]");
    CausalityCheck res;
    for (const CausalConstraint& c : constraints.items) {
        double v = 0.0;
        for (index_t i = 0; i < plan.size(); ++i) v += plan[i] * c.coeffs[i];
        res.max_violation = std::max(res.max_violation, std::abs(v));
    }
    res.causal = res.max_violation <= tol;
    return res;
}

LpResult exact_causal_lp(const Tensor& cost, const DiscretePathMeasure& mu,
                         const DiscretePathMeasure& nu) {
    check_measure(mu, "mu", "exact_causal_lp");
    check_measure(nu, "nu", "exact_causal_lp");
    check_lp_inputs(cost, mu.weights, nu.weights, "exact_causal_lp");
    if (cost.extent(0) != mu.atoms.m || cost.extent(1) != nu.atoms.m)
        throw std::invalid_argument("exact_causal_lp: cost shape does not match atom counts");
    const index_t m = mu.atoms.m, n = nu.atoms.m;
    CausalConstraintSet cons = causal_constraints(mu, nu.atoms);
    std::vector<std::vector<double>> A;
    std::vector<double> rhs;
    marginal_rows(m, n, A, rhs, mu.weights, nu.weights);
    for (const CausalConstraint& c : cons.items) {
        A.emplace_back(c.coeffs.data.begin(), c.coeffs.data.end());
        rhs.push_back(0.0);
    }
    SimplexResult s;
    try {
        s = solve_equality_lp(A, rhs, cost.data);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(
            "exact_causal_lp: solver failed although mu x nu is always feasible (internal): " +
            std::string(e.what()));
    }
    LpResult res;
    res.value = s.value;
    res.plan = Tensor({m, n}, std::move(s.x));
    return res;
}

// ---- entropic causal solver ----

namespace {

// Root of phi(tau) = sum exp(S + tau K) K over the entries with K != 0,
// normalized by the running max exponent so huge |S| is safe. phi is strictly
// increasing; a root exists whenever K takes both signs on the support.
double tilt_root(const std::vector<double>& s, const std::vector<double>& k) {
    auto phi = [&](double tau, double* dphi) {
        double mx = -kInf;
        for (std::size_t i = 0; i < s.size(); ++i)
            if (k[i] != 0.0) mx = std::max(mx, s[i] + tau * k[i]);
        double f = 0.0, d = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (k[i] == 0.0) continue;
            const double w = std::exp(s[i] + tau * k[i] - mx);
            f += w * k[i];
            d += w * k[i] * k[i];
        }
        if (dphi) *dphi = d;
        return f;
    };

    double lo, hi;
    if (phi(0.0, nullptr) >= 0.0) {
        hi = 0.0;
        lo = -1.0;
        int guard = 0;
        while (phi(lo, nullptr) > 0.0 && ++guard < 200) {
            hi = lo;
            lo *= 2.0;
        }
    } else {
        lo = 0.0;
        hi = 1.0;
        int guard = 0;
        while (phi(hi, nullptr) < 0.0 && ++guard < 200) {
            lo = hi;
            hi *= 2.0;
        }
    }

    double tau = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double d = 0.0;
        const double f = phi(tau, &d);
        if (f > 0.0)
            hi = tau;
        else
            lo = tau;
        double next = d > 0.0 ? tau - f / d : tau;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - tau) < 1e-15 * (1.0 + std::abs(tau))) return next;
        tau = next;
    }
    return tau;
}

}  // namespace

CausalEntropicResult entropic_causal_solve(const Tensor& cost, const DiscretePathMeasure& mu,
                                           const DiscretePathMeasure& nu, double eps,
                                           index_t max_sweeps, double tol) {
    check_measure(mu, "mu", "entropic_causal_solve");
    check_measure(nu, "nu", "entropic_causal_solve");
    check_lp_inputs(cost, mu.weights, nu.weights, "entropic_causal_solve");
    if (eps <= 0.0) throw std::invalid_argument("entropic_causal_solve: eps must be positive");
    if (max_sweeps < 1)
        throw std::invalid_argument("entropic_causal_solve: max_sweeps must be >= 1");
    const index_t m = mu.atoms.m, n = nu.atoms.m;
    const CausalConstraintSet cons = causal_constraints(mu, nu.atoms);
    const std::size_t K = cons.items.size();

    // Log-plan; cyclic KL projections onto rows, columns, and each equality.
    std::vector<double> S(static_cast<std::size_t>(m * n));
    for (index_t i = 0; i < m * n; ++i) S[static_cast<std::size_t>(i)] = -cost[i] / eps;

    CausalEntropicResult res;
    res.multipliers.assign(K, 0.0);
    std::vector<double> kvec(static_cast<std::size_t>(m * n));
    double prev_obj = kInf;

    auto objective = [&](double* sharp_out) {
        double sharp = 0.0, ent = 0.0;
        for (index_t i = 0; i < m * n; ++i) {
            const double p = std::exp(S[static_cast<std::size_t>(i)]);
            sharp += p * cost[i];
            ent -= p * S[static_cast<std::size_t>(i)];
        }
        if (sharp_out) *sharp_out = sharp;
        return sharp - eps * ent;
    };

    for (index_t sweep = 1; sweep <= max_sweeps; ++sweep) {
        // Row marginal projection.
        for (index_t i = 0; i < m; ++i) {
            double mx = -kInf;
            for (index_t j = 0; j < n; ++j) mx = std::max(mx, S[static_cast<std::size_t>(i * n + j)]);
            double s = 0.0;
            for (index_t j = 0; j < n; ++j) s += std::exp(S[static_cast<std::size_t>(i * n + j)] - mx);
            const double shift = std::log(mu.weights[i]) - (mx + std::log(s));
            for (index_t j = 0; j < n; ++j) S[static_cast<std::size_t>(i * n + j)] += shift;
        }
        // Column marginal projection.
        for (index_t j = 0; j < n; ++j) {
            double mx = -kInf;
            for (index_t i = 0; i < m; ++i) mx = std::max(mx, S[static_cast<std::size_t>(i * n + j)]);
            double s = 0.0;
            for (index_t i = 0; i < m; ++i) s += std::exp(S[static_cast<std::size_t>(i * n + j)] - mx);
            const double shift = std::log(nu.weights[j]) - (mx + std::log(s));
            for (index_t i = 0; i < m; ++i) S[static_cast<std::size_t>(i * n + j)] += shift;
        }
        // Causality equalities.
        for (std::size_t k = 0; k < K; ++k) {
            const Tensor& coef = cons.items[k].coeffs;
            bool active = false;
            for (index_t i = 0; i < m * n; ++i) {
                kvec[static_cast<std::size_t>(i)] = coef[i];
                active = active || coef[i] != 0.0;
            }
            if (!active) continue;
            const double tau = tilt_root(S, kvec);
            res.multipliers[k] += tau;
            for (index_t i = 0; i < m * n; ++i)
                S[static_cast<std::size_t>(i)] += tau * kvec[static_cast<std::size_t>(i)];
        }

        res.plan = Tensor({m, n});
        for (index_t i = 0; i < m * n; ++i) res.plan[i] = std::exp(S[static_cast<std::size_t>(i)]);
        double viol = marginal_violation(res.plan, mu.weights, nu.weights);
        for (const CausalConstraint& c : cons.items) {
            double v = 0.0;
            for (index_t i = 0; i < m * n; ++i) v += res.plan[i] * c.coeffs[i];
            viol = std::max(viol, std::abs(v));
        }
        const double obj = objective(&res.sharp_value);
        res.entropic_value = obj;
        res.sweeps = sweep;
        res.max_violation = viol;
        if (std::abs(prev_obj - obj) < tol && viol < tol) return res;
        prev_obj = obj;
    }
    throw std::runtime_error("entropic_causal_solve: no convergence in " +
                             std::to_string(max_sweeps) + " sweeps, final violation " +
                             std::to_string(res.max_violation));
}

}  // namespace cotgan
