#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace cotgan {

using index_t = std::int64_t;
using Shape = std::vector<index_t>;

index_t shape_numel(const Shape& s);
std::string shape_to_string(const Shape& s);

// Dense row-major tensor of 64-bit reals. Values are finite unless an
// operation's contract explicitly permits +-inf (log of zero).
struct Tensor {
    Shape shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(Shape s) : shape(std::move(s)), data(static_cast<std::size_t>(shape_numel(shape)), 0.0) {}
    Tensor(Shape s, std::vector<double> values);

    static Tensor zeros(Shape s) { return Tensor(std::move(s)); }
    static Tensor full(Shape s, double v);
    static Tensor scalar(double v);
    static Tensor from(Shape s, std::initializer_list<double> values);

    index_t size() const { return static_cast<index_t>(data.size()); }
    index_t rank() const { return static_cast<index_t>(shape.size()); }
    index_t extent(index_t axis) const { return shape[static_cast<std::size_t>(axis)]; }

    double& operator[](index_t i) { return data[static_cast<std::size_t>(i)]; }
    double operator[](index_t i) const { return data[static_cast<std::size_t>(i)]; }

    double& at(index_t i, index_t j) { return data[static_cast<std::size_t>(i * shape[1] + j)]; }
    double at(index_t i, index_t j) const { return data[static_cast<std::size_t>(i * shape[1] + j)]; }
    double& at(index_t i, index_t j, index_t k) {
        return data[static_cast<std::size_t>((i * shape[1] + j) * shape[2] + k)];
    }
    double at(index_t i, index_t j, index_t k) const {
        return data[static_cast<std::size_t>((i * shape[1] + j) * shape[2] + k)];
    }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }

    double max_abs() const;
    bool all_finite() const;
};

// Broadcast rules: shapes are aligned from the trailing axis; each pair of
// extents must match or one of them must be 1. Throws std::invalid_argument
// naming `op` on mismatch.
Shape broadcast_shapes(const Shape& a, const Shape& b, const char* op);

// out[i] = f(a[bi], b[bj]) over the broadcast shape.
Tensor broadcast_binary(const Tensor& a, const Tensor& b, const char* op, double (*f)(double, double));

// Sums `g` down to `target` shape by adding over broadcast axes.
// Inverse of broadcasting, used by gradients of elementwise ops.
Tensor reduce_to_shape(const Tensor& g, const Shape& target);

// Dense [p,q] x [q,r] -> [p,r].
Tensor matmul_forward(const Tensor& a, const Tensor& b);

// Decomposes `shape` as [outer, shape[axis], inner] for one-axis reductions.
void split_axis(const Shape& shape, index_t axis, index_t& outer, index_t& len, index_t& inner);

}  // namespace cotgan
