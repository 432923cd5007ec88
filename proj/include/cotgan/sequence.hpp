#pragma once

#include <stdexcept>
#include <string>

#include "cotgan/tensor.hpp"

namespace cotgan {

// A mini-batch of m sequences, T steps each, d channels per step.
// values is [m, T, d] row-major.
struct SequenceBatch {
    index_t m = 0;
    index_t T = 0;
    index_t d = 0;
    Tensor values;

    SequenceBatch() = default;
    SequenceBatch(index_t m_, index_t T_, index_t d_)
        : m(m_), T(T_), d(d_), values(Shape{m_, T_, d_}) {}
    explicit SequenceBatch(Tensor v) {
        if (v.rank() != 3)
            throw std::invalid_argument("SequenceBatch: need a [m,T,d] tensor, got " +
                                        shape_to_string(v.shape));
        m = v.extent(0);
        T = v.extent(1);
        d = v.extent(2);
        values = std::move(v);
    }

    // View of the batch as m points in R^{T*d}, the shape cost kernels expect.
    Tensor flattened() const { return Tensor(Shape{m, T * d}, values.data); }
};

}  // namespace cotgan
