#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cotgan/divergences.hpp"
#include "cotgan/sequence.hpp"
#include "cotgan/tensor.hpp"

namespace cotgan {

// Correlation summary of a batch plus its total absolute deviation from the
// same statistics of a reference batch.
struct CorrReport {
    Tensor autocorr;      // [T, d]: per-channel autocorrelation at each lag
    Tensor channel_corr;  // [d, d]: per-step channel correlation averaged over t
    double autocorr_mismatch = 0.0;  // sum over (lag, channel) of |batch - reference|
    double channel_mismatch = 0.0;   // sum over (channel, channel) of |batch - reference|
    bool degenerate = false;         // some channel had exactly zero variance
};

// Batches must agree in T and d; m may differ. Autocorrelation pools mean and
// covariance over the whole batch and divides by m*T at every lag (the biased
// estimator), then normalizes by lag 0. Channels with zero variance get
// correlation 0 and raise the degenerate flag.
CorrReport correlation_stats(const SequenceBatch& batch, const SequenceBatch& reference);

// Marginal pixel histogram and the joint distribution of the bump location at
// adjacent steps, for data living in [0, 1].
struct DistributionReport {
    Tensor histogram;     // [50]: counts over equal-width bins on [0, 1]
    Tensor joint_counts;  // [d, d]: counts of (argmax at t, argmax at t+1)
};

// Throws std::invalid_argument if any value falls outside [0, 1]. Argmax ties
// break toward the lower channel index.
DistributionReport distribution_stats(const SequenceBatch& batch);

// One grid point of the mini-batch bias experiment.
struct BiasCurveRow {
    DivergenceKind kind = DivergenceKind::Mixed4;
    index_t m = 0;
    double theta = 0.0;
    double mean = 0.0;
    double sem = 0.0;
    index_t replicates = 0;
};

// Mean and standard error of `kind` between fresh batches from the theta=0.8
// sinusoid family and fresh batches from each grid theta. Common random
// numbers: per replicate the mu batches are drawn once, and the nu stream is
// re-seeded identically for every theta, so theta changes only the amplitude
// map applied to the same underlying uniforms. Fully deterministic given the
// two seeds.
std::vector<BiasCurveRow> bias_curve(DivergenceKind kind, const std::vector<double>& thetas,
                                     const std::vector<index_t>& ms, index_t replicates,
                                     double eps, index_t iters, std::uint64_t mu_seed = 700001,
                                     std::uint64_t nu_seed = 900001);

// Long format: stat,i,j,value with the scalar rows at i = j = -1.
void save_corr_report_csv(const std::filesystem::path& path, const CorrReport& report);
void save_histogram_csv(const std::filesystem::path& path, const DistributionReport& report);
void save_joint_counts_csv(const std::filesystem::path& path, const DistributionReport& report);
void save_bias_curve_csv(const std::filesystem::path& path, const std::vector<BiasCurveRow>& rows);

}  // namespace cotgan
