#pragma once

#include <filesystem>
#include <vector>

#include "cotgan/rng.hpp"
#include "cotgan/sequence.hpp"
#include "cotgan/tensor.hpp"

namespace cotgan {

// Vector autoregression x_t = A x_{t-1} + z_t with diagonal A (entries evenly
// spaced over [0.1, 0.9]) and compound-symmetric noise covariance
// 0.5 I + 0.5 (unit diagonal, 0.5 everywhere else).
struct Ar1Spec {
    index_t d = 10;
    index_t T = 32;
    index_t burn_in = 10;
    std::vector<double> a;  // diagonal of A; empty selects ar1_coeffs(d)
};

std::vector<double> ar1_coeffs(index_t d);
Tensor ar1_noise_cov(index_t d);
SequenceBatch gen_ar1(const Ar1Spec& spec, index_t m, Rng& rng);

// Dense lower-triangular Cholesky factor; throws std::runtime_error if the
// matrix is not positive definite.
Tensor cholesky_lower(const Tensor& sym);

// Two-dimensional latent state rotated each step and radially squashed toward
// a ring, rendered as a one-dimensional Gaussian bump over a fixed pixel grid.
// The radial factor is c_t = 1 / (|s| (exp(-4(|s| - 0.3)) + 1)), i.e. the new
// radius is sigmoid(4(|s| - 0.3)); this map has a stable fixed point near
// 0.92, keeping the bump on screen indefinitely.
struct OscillationSpec {
    index_t T = 48;
    index_t d = 20;
    double omega = 2.0 * 3.141592653589793238462643383279502884 / 12.0;
    double noise_std = 0.31622776601683794;  // sqrt(0.1)
    double loc_lo = -1.0;
    double loc_hi = 1.0;
    double bump_width = 0.3;
};

// states_out, if given, receives the latent trajectory as [m, T, 2].
SequenceBatch gen_noisy_oscillation(const OscillationSpec& spec, index_t m, Rng& rng,
                                    Tensor* states_out = nullptr);

// One-channel sinusoids with random phase, frequency, and amplitude;
// amplitude ~ U[0.3, theta_max] parametrizes the family.
struct SinusoidSpec {
    double theta_max = 0.8;
    index_t T = 20;
    double freq_lo = 1.0;  // cycles per window
    double freq_hi = 2.0;
};

struct SinusoidSample {
    SequenceBatch batch;
    Tensor amplitude;  // [m]
    Tensor frequency;  // [m]
    Tensor phase;      // [m]
};

SinusoidSample gen_sinusoids(const SinusoidSpec& spec, index_t m, Rng& rng);

// CSV schema: rows are time steps, columns are channels, sequences separated
// by one blank line. Every sequence must be exactly T rows of d values.
SequenceBatch load_csv_sequences(const std::filesystem::path& path, index_t T, index_t d);
void save_csv_sequences(const std::filesystem::path& path, const SequenceBatch& batch);

// Per-channel: subtract mean, divide by 3 * std (floored at 1e-12), tanh.
SequenceBatch preprocess_standardize_tanh(const SequenceBatch& batch);

}  // namespace cotgan
