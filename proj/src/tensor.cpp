#include "cotgan/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cotgan {

index_t shape_numel(const Shape& s) {
    index_t n = 1;
    for (index_t e : s) {
        if (e <= 0) throw std::invalid_argument("tensor extents must be positive, got " + shape_to_string(s));
        n *= e;
    }
    return n;
}

std::string shape_to_string(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << ",";
        os << s[i];
    }
    os << "]";
    return os.str();
}

Tensor::Tensor(Shape s, std::vector<double> values) : shape(std::move(s)), data(std::move(values)) {
    if (static_cast<index_t>(data.size()) != shape_numel(shape)) {
        throw std::invalid_argument("tensor data length " + std::to_string(data.size()) +
                                    " does not match shape " + shape_to_string(shape));
    }
}

Tensor Tensor::full(Shape s, double v) {
    Tensor t(std::move(s));
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
}

Tensor Tensor::scalar(double v) {
    Tensor t(Shape{1});
    t.data[0] = v;
    return t;
}

Tensor Tensor::from(Shape s, std::initializer_list<double> values) {
    return Tensor(std::move(s), std::vector<double>(values));
}

double Tensor::max_abs() const {
    double m = 0.0;
    for (double v : data) m = std::max(m, std::abs(v));
    return m;
}

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

Shape broadcast_shapes(const Shape& a, const Shape& b, const char* op) {
    const std::size_t ra = a.size(), rb = b.size();
    const std::size_t r = std::max(ra, rb);
    Shape out(r);
    for (std::size_t k = 0; k < r; ++k) {
        const index_t ea = k < ra ? a[ra - 1 - k] : 1;
        const index_t eb = k < rb ? b[rb - 1 - k] : 1;
        if (ea != eb && ea != 1 && eb != 1) {
            throw std::invalid_argument(std::string(op) + ": shapes do not broadcast: " + shape_to_string(a) +
                                        " vs " + shape_to_string(b));
        }
        out[r - 1 - k] = std::max(ea, eb);
    }
    return out;
}

namespace {

// Row-major strides with 0 on broadcast axes, aligned to `out_rank`.
std::vector<index_t> broadcast_strides(const Shape& s, const Shape& out) {
    const std::size_t r = out.size(), rs = s.size();
    std::vector<index_t> strides(r, 0);
    index_t acc = 1;
    for (std::size_t k = 0; k < rs; ++k) {
        const std::size_t i = rs - 1 - k;
        const std::size_t oi = r - 1 - k;
        strides[oi] = (s[i] == 1 && out[oi] != 1) ? 0 : acc;
        acc *= s[i];
    }
    return strides;
}

}  // namespace

Tensor broadcast_binary(const Tensor& a, const Tensor& b, const char* op, double (*f)(double, double)) {
    if (a.shape == b.shape) {
        Tensor out(a.shape);
        const index_t n = a.size();
        for (index_t i = 0; i < n; ++i) out[i] = f(a[i], b[i]);
        return out;
    }
    const Shape os = broadcast_shapes(a.shape, b.shape, op);
    Tensor out(os);
    const auto sa = broadcast_strides(a.shape, os);
    const auto sb = broadcast_strides(b.shape, os);
    const std::size_t r = os.size();
    std::vector<index_t> idx(r, 0);
    const index_t n = out.size();
    index_t ia = 0, ib = 0;
    for (index_t lin = 0; lin < n; ++lin) {
        out[lin] = f(a[ia], b[ib]);
        for (std::size_t k = r; k-- > 0;) {
            ++idx[k];
            ia += sa[k];
            ib += sb[k];
            if (idx[k] < os[k]) break;
            ia -= sa[k] * os[k];
            ib -= sb[k] * os[k];
            idx[k] = 0;
        }
    }
    return out;
}

Tensor reduce_to_shape(const Tensor& g, const Shape& target) {
    if (g.shape == target) return g;
    Tensor out(target);
    const auto st = broadcast_strides(target, g.shape);
    const std::size_t r = g.shape.size();
    std::vector<index_t> idx(r, 0);
    const index_t n = g.size();
    index_t it = 0;
    for (index_t lin = 0; lin < n; ++lin) {
        out[it] += g[lin];
        for (std::size_t k = r; k-- > 0;) {
            ++idx[k];
            it += st[k];
            if (idx[k] < g.shape[k]) break;
            it -= st[k] * g.shape[k];
            idx[k] = 0;
        }
    }
    return out;
}

Tensor matmul_forward(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.shape[1] != b.shape[0]) {
        throw std::invalid_argument("matmul: incompatible shapes " + shape_to_string(a.shape) + " vs " +
                                    shape_to_string(b.shape));
    }
    const index_t p = a.shape[0], q = a.shape[1], r = b.shape[1];
    Tensor out(Shape{p, r});
    for (index_t i = 0; i < p; ++i) {
        const double* arow = a.data.data() + i * q;
        double* orow = out.data.data() + i * r;
        for (index_t k = 0; k < q; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.data.data() + k * r;
            for (index_t j = 0; j < r; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

void split_axis(const Shape& shape, index_t axis, index_t& outer, index_t& len, index_t& inner) {
    if (axis < 0 || axis >= static_cast<index_t>(shape.size())) {
        throw std::invalid_argument("axis " + std::to_string(axis) + " out of range for shape " +
                                    shape_to_string(shape));
    }
    outer = 1;
    inner = 1;
    for (index_t k = 0; k < axis; ++k) outer *= shape[static_cast<std::size_t>(k)];
    len = shape[static_cast<std::size_t>(axis)];
    for (std::size_t k = static_cast<std::size_t>(axis) + 1; k < shape.size(); ++k) inner *= shape[k];
}

}  // namespace cotgan
