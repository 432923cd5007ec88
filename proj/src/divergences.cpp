#include "cotgan/divergences.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cotgan/ot.hpp"

namespace cotgan {

const char* divergence_name(DivergenceKind kind) {
    switch (kind) {
        case DivergenceKind::Sharp: return "sharp";
        case DivergenceKind::Sinkhorn2Term: return "sinkhorn_2term";
        case DivergenceKind::Variant3: return "variant_3";
        case DivergenceKind::Mixed4: return "mixed_4";
        case DivergenceKind::Variant6: return "variant_6";
        case DivergenceKind::Variant8: return "variant_8";
        case DivergenceKind::MmdBiased: return "mmd_biased";
        case DivergenceKind::MmdUnbiased: return "mmd_unbiased";
    }
    throw std::invalid_argument("divergence_name: unknown kind");
}

DivergenceKind parse_divergence_kind(const std::string& name) {
    static const DivergenceKind all[] = {
        DivergenceKind::Sharp,    DivergenceKind::Sinkhorn2Term, DivergenceKind::Variant3,
        DivergenceKind::Mixed4,   DivergenceKind::Variant6,      DivergenceKind::Variant8,
        DivergenceKind::MmdBiased, DivergenceKind::MmdUnbiased,
    };
    for (DivergenceKind k : all)
        if (name == divergence_name(k)) return k;
    std::string msg = "parse_divergence_kind: unknown kind '" + name + "', expected one of";
    for (DivergenceKind k : all) msg += std::string(" ") + divergence_name(k);
    throw std::invalid_argument(msg);
}

bool divergence_needs_pair(DivergenceKind kind) {
    switch (kind) {
        case DivergenceKind::Variant3:
        case DivergenceKind::Mixed4:
        case DivergenceKind::Variant6:
        case DivergenceKind::Variant8:
        case DivergenceKind::MmdUnbiased: return true;
        default: return false;
    }
}

double sharp_distance(const SequenceBatch& x, const SequenceBatch& y, BaseCost base, double eps,
                      index_t iters) {
    if (x.m != y.m)
        throw std::invalid_argument("sharp_distance: batch sizes differ, " + std::to_string(x.m) +
                                    " vs " + std::to_string(y.m));
    const Tensor c = pairwise_cost(x, y, base);
    return sinkhorn(c, uniform_weights(x.m), uniform_weights(y.m), eps, iters).sharp_value;
}

namespace {

double cross_mean(const SequenceBatch& x, const SequenceBatch& y, BaseCost base) {
    return cost_mean(pairwise_cost(x, y, base));
}

void check_batch_sizes(const SequenceBatch& x, const SequenceBatch& y,
                       const SequenceBatch* x_prime, const SequenceBatch* y_prime,
                       const char* fn) {
    if (y.m != x.m || (x_prime != nullptr && x_prime->m != x.m) ||
        (y_prime != nullptr && y_prime->m != x.m))
        throw std::invalid_argument(std::string(fn) + ": all mini-batches must share one size");
}

void require_pair(DivergenceKind kind, const SequenceBatch* x_prime,
                  const SequenceBatch* y_prime, const char* fn) {
    if (x_prime == nullptr || y_prime == nullptr)
        throw std::invalid_argument(std::string(fn) + ": kind " + divergence_name(kind) +
                                    " needs a second mini-batch per distribution");
}

}  // namespace

double mmd_estimate(DivergenceKind kind, const SequenceBatch& x, const SequenceBatch& y,
                    const SequenceBatch* x_prime, const SequenceBatch* y_prime, BaseCost base) {
    check_batch_sizes(x, y, x_prime, y_prime, "mmd_estimate");
    switch (kind) {
        case DivergenceKind::MmdBiased:
            return 2.0 * cross_mean(x, y, base) - cross_mean(x, x, base) -
                   cross_mean(y, y, base);
        case DivergenceKind::MmdUnbiased: {
            require_pair(kind, x_prime, y_prime, "mmd_estimate");
            return (cross_mean(x, y, base) - cross_mean(x, *x_prime, base)) +
                   (cross_mean(*x_prime, *y_prime, base) - cross_mean(y, *y_prime, base));
        }
        default:
            throw std::invalid_argument(std::string("mmd_estimate: kind ") +
                                        divergence_name(kind) + " is not an MMD estimator");
    }
}

double divergence(DivergenceKind kind, const SequenceBatch& x, const SequenceBatch& y,
                  const SequenceBatch* x_prime, const SequenceBatch* y_prime, BaseCost base,
                  double eps, index_t iters) {
    check_batch_sizes(x, y, x_prime, y_prime, "divergence");
    const auto w = [&](const SequenceBatch& p, const SequenceBatch& q) {
        return sharp_distance(p, q, base, eps, iters);
    };
    switch (kind) {
        case DivergenceKind::Sharp: return w(x, y);
        case DivergenceKind::Sinkhorn2Term: {
            const double wxy = w(x, y);
            return (wxy - w(x, x)) + (wxy - w(y, y));
        }
        case DivergenceKind::Variant3: {
            require_pair(kind, x_prime, y_prime, "divergence");
            const double wxy = w(x, y);
            return (wxy - w(x, *x_prime)) + (wxy - w(y, *y_prime));
        }
        case DivergenceKind::Mixed4:
            require_pair(kind, x_prime, y_prime, "divergence");
            return (w(x, y) - w(x, *x_prime)) + (w(*x_prime, *y_prime) - w(y, *y_prime));
        case DivergenceKind::Variant6: {
            require_pair(kind, x_prime, y_prime, "divergence");
            const double wxx = w(x, *x_prime);
            const double wyy = w(y, *y_prime);
            return (w(x, y) - wxx) + (w(x, *y_prime) - wyy) + (w(*x_prime, y) - wxx) +
                   (w(*x_prime, *y_prime) - wyy);
        }
        case DivergenceKind::Variant8:
            require_pair(kind, x_prime, y_prime, "divergence");
            return (w(x, y) - w(x, *x_prime)) + (w(x, *y_prime) - w(y, *y_prime)) +
                   (w(*x_prime, y) - w(x, x)) + (w(*x_prime, *y_prime) - w(y, y));
        case DivergenceKind::MmdBiased:
        case DivergenceKind::MmdUnbiased:
            return mmd_estimate(kind, x, y, x_prime, y_prime, base);
    }
    throw std::invalid_argument("divergence: unknown kind");
}

double divergence(DivergenceKind kind, const SequenceBatch& x, const SequenceBatch& y,
                  BaseCost base, double eps, index_t iters) {
    if (divergence_needs_pair(kind)) require_pair(kind, nullptr, nullptr, "divergence");
    return divergence(kind, x, y, nullptr, nullptr, base, eps, iters);
}

Var sinkhorn_sharp(Var cost, const Tensor& a, const Tensor& b, double eps, index_t iters) {
    Tape& t = *cost.tape;
    const Tensor& cv = t.value(cost);
    if (cv.rank() != 2)
        throw std::invalid_argument("sinkhorn_sharp: cost must be a matrix, got " +
                                    shape_to_string(cv.shape));
    if (eps <= 0.0) throw std::invalid_argument("sinkhorn_sharp: eps must be positive");
    if (iters < 1) throw std::invalid_argument("sinkhorn_sharp: iteration count must be >= 1");
    if (!cv.all_finite())
        throw std::invalid_argument("sinkhorn_sharp: cost has non-finite entries");
    const index_t m = cv.extent(0), n = cv.extent(1);
    const auto check_weights = [](const Tensor& w, index_t len, const char* name) {
        if (w.rank() != 1 || w.extent(0) != len)
            throw std::invalid_argument(std::string("sinkhorn_sharp: ") + name +
                                        " must have length " + std::to_string(len) +
                                        ", got shape " + shape_to_string(w.shape));
        double s = 0.0;
        for (double v : w.data) {
            if (!(v > 0.0))
                throw std::invalid_argument(std::string("sinkhorn_sharp: ") + name +
                                            " must be strictly positive");
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-9)
            throw std::invalid_argument(std::string("sinkhorn_sharp: ") + name + " sums to " +
                                        std::to_string(s) + ", expected 1");
    };
    check_weights(a, m, "a");
    check_weights(b, n, "b");

    Tensor fa({m}), gb({n});
    for (index_t i = 0; i < m; ++i) fa[i] = eps * std::log(a[i]);
    for (index_t j = 0; j < n; ++j) gb[j] = eps * std::log(b[j]);
    const Var fa_c = t.constant(std::move(fa));
    const Var gb_c = t.constant(std::move(gb));

    // Mirrors the plain solver sweep for sweep: same kernel, same operation
    // order, so the resulting value is bit for bit identical.
    Var g = t.constant(Tensor({n}));
    Var f{};
    for (index_t it = 1; it <= iters; ++it) {
        f = sub(fa_c, scale(lse_sub_scaled(cost, g, eps, 1), eps));
        g = sub(gb_c, scale(lse_sub_scaled(cost, f, eps, 0), eps));
    }
    const Var fg = add(reshape(f, {m, 1}), reshape(g, {1, n}));
    const Var plan = exp(scale(sub(fg, cost), 1.0 / eps));
    return sum_all(mul(plan, cost));
}

}  // namespace cotgan
