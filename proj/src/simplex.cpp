#include "cotgan/simplex.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cotgan {

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kFeasTol = 1e-9;

struct Tableau {
    // rows x (ncols + 1); the extra column is the rhs. Last row is the
    // objective (reduced costs, with the negated objective value in its rhs).
    std::vector<std::vector<double>> t;
    std::vector<int> basis;  // basic variable per constraint row
    int rows = 0;            // constraint rows
    int cols = 0;            // variable columns

    double& at(int i, int j) { return t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
    double& rhs(int i) { return t[static_cast<std::size_t>(i)][static_cast<std::size_t>(cols)]; }
    double& obj(int j) { return t[static_cast<std::size_t>(rows)][static_cast<std::size_t>(j)]; }
    double& objrhs() { return t[static_cast<std::size_t>(rows)][static_cast<std::size_t>(cols)]; }

    void pivot(int pr, int pc) {
        const double p = at(pr, pc);
        for (int j = 0; j <= cols; ++j) t[static_cast<std::size_t>(pr)][static_cast<std::size_t>(j)] /= p;
        for (int i = 0; i <= rows; ++i) {
            if (i == pr) continue;
            const double f = t[static_cast<std::size_t>(i)][static_cast<std::size_t>(pc)];
            if (f == 0.0) continue;
            for (int j = 0; j <= cols; ++j)
                t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -=
                    f * t[static_cast<std::size_t>(pr)][static_cast<std::size_t>(j)];
        }
        basis[static_cast<std::size_t>(pr)] = pc;
    }

    // Bland's rule: entering = smallest index with negative reduced cost;
    // leaving = ratio test, ties broken by smallest basic variable index.
    bool iterate() {
        while (true) {
            int enter = -1;
            for (int j = 0; j < cols; ++j)
                if (obj(j) < -kPivotTol) {
                    enter = j;
                    break;
                }
            if (enter < 0) return true;  // optimal
            int leave = -1;
            double best = 0.0;
            for (int i = 0; i < rows; ++i) {
                const double aij = at(i, enter);
                if (aij > kPivotTol) {
                    const double ratio = rhs(i) / aij;
                    if (leave < 0 || ratio < best - 1e-15 ||
                        (std::abs(ratio - best) <= 1e-15 &&
                         basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                        leave = i;
                        best = ratio;
                    }
                }
            }
            if (leave < 0) return false;  // unbounded
            pivot(leave, enter);
        }
    }
};

}  // namespace

SimplexResult solve_equality_lp(const std::vector<std::vector<double>>& A,
                                const std::vector<double>& rhs,
                                const std::vector<double>& cost) {
    const int R = static_cast<int>(A.size());
    const int N = static_cast<int>(cost.size());
    if (R == 0 || N == 0) throw std::invalid_argument("solve_equality_lp: empty program");
    if (static_cast<int>(rhs.size()) != R)
        throw std::invalid_argument("solve_equality_lp: rhs length mismatch");
    for (const auto& row : A)
        if (static_cast<int>(row.size()) != N)
            throw std::invalid_argument("solve_equality_lp: constraint width mismatch");

    // Phase 1 tableau: [A | I] with artificials basic; rows flipped so rhs >= 0.
    Tableau tb;
    tb.rows = R;
    tb.cols = N + R;
    tb.t.assign(static_cast<std::size_t>(R + 1), std::vector<double>(static_cast<std::size_t>(tb.cols + 1), 0.0));
    tb.basis.resize(static_cast<std::size_t>(R));
    for (int i = 0; i < R; ++i) {
        const double sgn = rhs[static_cast<std::size_t>(i)] < 0.0 ? -1.0 : 1.0;
        for (int j = 0; j < N; ++j) tb.at(i, j) = sgn * A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        tb.at(i, N + i) = 1.0;
        tb.rhs(i) = sgn * rhs[static_cast<std::size_t>(i)];
        tb.basis[static_cast<std::size_t>(i)] = N + i;
    }
    // Reduced costs for min sum(artificials): subtract each constraint row.
    for (int j = 0; j <= tb.cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < R; ++i) s += tb.t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        tb.t[static_cast<std::size_t>(R)][static_cast<std::size_t>(j)] =
            (j >= N && j < N + R ? 1.0 : 0.0) - s;
    }
    if (!tb.iterate()) throw std::runtime_error("solve_equality_lp: phase 1 unbounded (internal)");
    if (-tb.objrhs() > kFeasTol)
        throw std::runtime_error("solve_equality_lp: infeasible, phase-1 objective " +
                                 std::to_string(-tb.objrhs()));

    // Pivot leftover artificials out of the basis; a row where that is
    // impossible is redundant and gets dropped.
    std::vector<int> keep;
    for (int i = 0; i < R; ++i) {
        if (tb.basis[static_cast<std::size_t>(i)] < N) {
            keep.push_back(i);
            continue;
        }
        int pc = -1;
        for (int j = 0; j < N; ++j)
            if (std::abs(tb.at(i, j)) > kPivotTol) {
                pc = j;
                break;
            }
        if (pc >= 0) {
            tb.pivot(i, pc);
            keep.push_back(i);
        }
    }
    Tableau p2;
    p2.rows = static_cast<int>(keep.size());
    p2.cols = N;
    p2.t.assign(static_cast<std::size_t>(p2.rows + 1), std::vector<double>(static_cast<std::size_t>(N + 1), 0.0));
    p2.basis.resize(static_cast<std::size_t>(p2.rows));
    for (int i = 0; i < p2.rows; ++i) {
        const int src = keep[static_cast<std::size_t>(i)];
        for (int j = 0; j < N; ++j) p2.at(i, j) = tb.at(src, j);
        p2.rhs(i) = tb.rhs(src);
        p2.basis[static_cast<std::size_t>(i)] = tb.basis[static_cast<std::size_t>(src)];
    }
    // Reduced costs c_j - c_B . B^{-1} A_j for the real objective.
    for (int j = 0; j <= N; ++j) {
        double s = j < N ? cost[static_cast<std::size_t>(j)] : 0.0;
        for (int i = 0; i < p2.rows; ++i)
            s -= cost[static_cast<std::size_t>(p2.basis[static_cast<std::size_t>(i)])] *
                 p2.t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        p2.t[static_cast<std::size_t>(p2.rows)][static_cast<std::size_t>(j)] = s;
    }
    if (!p2.iterate())
        throw std::runtime_error("solve_equality_lp: unbounded objective (internal)");

    SimplexResult res;
    res.x.assign(static_cast<std::size_t>(N), 0.0);
    for (int i = 0; i < p2.rows; ++i) {
        double v = p2.rhs(i);
        if (v < 0.0 && v > -kFeasTol) v = 0.0;
        res.x[static_cast<std::size_t>(p2.basis[static_cast<std::size_t>(i)])] = v;
    }
    double val = 0.0;
    for (int j = 0; j < N; ++j) val += cost[static_cast<std::size_t>(j)] * res.x[static_cast<std::size_t>(j)];
    res.value = val;
    return res;
}

}  // namespace cotgan
