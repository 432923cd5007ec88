#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cotgan/causal.hpp"
#include "cotgan/nets.hpp"
#include "cotgan/ot.hpp"
#include "cotgan/rng.hpp"
#include "cotgan/sequence.hpp"
#include "cotgan/synthetic.hpp"
#include "cotgan/tape.hpp"
#include "cotgan/tensor.hpp"

namespace cotgan {

// eta_s = eta0 * rate^(s / frequency), the exponent evaluated as real division.
double lr_schedule(double eta0, double rate, index_t step, double frequency);

struct TrainConfig {
    index_t m = 32;              // mini-batch size per distribution
    double eps = 10.0;
    index_t sinkhorn_iters = 100;
    double lambda = 10.0;        // martingale penalty weight, discriminator only
    index_t iterations = 1000;   // total outer iterations to reach
    std::uint64_t seed = 1;

    double eta0 = 0.001;         // step size before decay
    double decay_rate = 0.98;
    double decay_every = 500.0;
    bool use_adam = true;        // false = plain SGD with the same schedule

    index_t T = 0;               // sequence length the data source produces
    index_t d = 0;               // channels the data source produces
    index_t latent_step_dim = 10;
    index_t latent_static_dim = 10;
    index_t lstm_hidden = 32;
    index_t lstm_layers = 1;
    index_t fc_hidden = 32;
    index_t disc_hidden = 32;    // trace network width
    index_t trace_dim = 16;
    HeadKind gen_head = HeadKind::Linear;
    HeadKind disc_head = HeadKind::Linear;
    double eta = 1e-6;           // penalty variance floor
    BaseCost base_cost = BaseCost::SquaredL2;

    index_t flush_every = 25;      // metric rows buffered between CSV flushes
    index_t checkpoint_every = 0;  // 0 = final checkpoint only
};

void validate(const TrainConfig& cfg);

// Draws a fresh mini-batch of m real sequences from the caller's stream.
using DataSource = std::function<SequenceBatch(index_t m, Rng& rng)>;

enum class DatasetKind { Ar1, Oscillation, Sinusoid, Csv };

const char* dataset_name(DatasetKind kind);
DatasetKind parse_dataset_kind(const std::string& name);

struct DatasetSpec {
    DatasetKind kind = DatasetKind::Ar1;
    Ar1Spec ar1;
    OscillationSpec oscillation;
    SinusoidSpec sinusoid;
    std::filesystem::path csv_path;  // sampled with replacement from the file
    index_t csv_T = 0;
    index_t csv_d = 0;
    bool csv_preprocess = false;  // standardize-tanh the pool once after loading
};

// {T, d} of the batches the spec's source will produce.
std::pair<index_t, index_t> dataset_dims(const DatasetSpec& spec);

// Csv loads the whole file once, so a bad path fails here, not mid-run.
DataSource make_data_source(const DatasetSpec& spec);

struct AdamMoments {
    Tensor m1;
    Tensor m2;
};

// One slot per parameter tensor, in the named_parameters order of its group.
// b1t/b2t hold beta^t as running products, so the bias correction never calls
// pow and a resumed run reproduces the exact arithmetic.
struct OptimizerState {
    std::vector<AdamMoments> slots;
    index_t t = 0;
    double b1t = 1.0;
    double b2t = 1.0;
};

OptimizerState init_optimizer(const std::vector<std::pair<std::string, Tensor*>>& params);

// params[i] += direction * alpha * mhat_i / (sqrt(vhat_i) + eps), the standard
// bias-corrected step. alpha is the already-decayed step size; direction is +1
// for ascent, -1 for descent. Betas must stay fixed across a state's lifetime.
void adam_update(const std::vector<std::pair<std::string, Tensor*>>& params,
                 const std::vector<Tensor>& grads, OptimizerState& opt, double alpha,
                 double direction, double beta1 = 0.9, double beta2 = 0.999,
                 double eps = 1e-8);

// params[i] += direction * alpha * grads[i].
void sgd_update(const std::vector<std::pair<std::string, Tensor*>>& params,
                const std::vector<Tensor>& grads, double alpha, double direction);

struct MetricRow {
    index_t iteration = 0;
    double mixed = 0.0;    // generator half-step value (the quantity theta descends)
    double penalty = 0.0;  // discriminator half-step value
    double lr = 0.0;
    double wall_ms = 0.0;
};

struct TrainState {
    GeneratorParams gen;
    CausalCostParams disc;
    OptimizerState gen_opt;
    OptimizerState disc_opt;
    index_t iteration = 0;
    index_t sinkhorn_calls = 0;  // lifetime solver invocations, 8 per iteration
    Rng rng = Rng(0);            // owns batch and latent sampling; checkpointed
    std::vector<MetricRow> history;  // append-only, one row per iteration
};

TrainState init_train_state(const TrainConfig& cfg);

// The four-term mixed objective on one tape:
//   (W(x,y) - W(x,x')) + (W(x',y') - W(y,y'))
// with cost(A,B) = base(A,B) + sum h(B) dM(A). Row batches feed the m network,
// column batches the h network; all four batches are [m,T,d] nodes, so any of
// them may carry gradients. Each Sinkhorn term shares eps and iters, and every
// call bumps *calls when given.
struct MixedObjective {
    Var mixed;
    Var m_x_traces;  // M traces of x, reused by the martingale penalty
};

MixedObjective mixed_objective(Tape& tape, const TraceNetVars& h_net, const TraceNetVars& m_net,
                               Var x, Var x_prime, Var y, Var y_prime, BaseCost base, double eps,
                               index_t iters, index_t* calls = nullptr);

struct StepReport {
    double mixed = 0.0;
    double penalty = 0.0;  // zero in the generator half
};

// One ascent step on the trace networks: samples x, x', z, z' in that order
// from state.rng, forwards y = g(z), y' = g(z') with theta frozen, and climbs
// mixed - lambda * penalty(M(x)). Throws std::runtime_error naming the
// iteration if the objective turns non-finite.
StepReport discriminator_step(TrainState& state, const TrainConfig& cfg, const DataSource& data);

// One descent step on the generator: fresh batches, trace networks frozen,
// penalty excluded.
StepReport generator_step(TrainState& state, const TrainConfig& cfg, const DataSource& data);

struct TrainPaths {
    std::filesystem::path metrics_csv;     // empty = history stays in memory
    std::filesystem::path checkpoint_dir;  // empty = never checkpointed
};

// Runs outer iterations (discriminator half, then generator half, freshly
// sampled batches for each) until state.iteration reaches cfg.iterations.
// Metric rows flush every cfg.flush_every iterations; checkpoints overwrite
// checkpoint_dir every cfg.checkpoint_every iterations and once at the end.
void train(TrainState& state, const TrainConfig& cfg, const DataSource& data,
           const TrainPaths& paths = {});

// Parameters, optimizer moments, counters, and the rng stream; loading into a
// mismatched config throws std::runtime_error. Metric history is not part of
// a checkpoint; the CSV carries it.
void save_checkpoint(const std::filesystem::path& dir, const TrainState& state);
TrainState load_checkpoint(const std::filesystem::path& dir, const TrainConfig& cfg);

}  // namespace cotgan
