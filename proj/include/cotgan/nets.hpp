#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cotgan/causal.hpp"
#include "cotgan/rng.hpp"
#include "cotgan/sequence.hpp"
#include "cotgan/tape.hpp"
#include "cotgan/tensor.hpp"

namespace cotgan {

// Latent input: step_dim fresh standard normals per time step plus one
// static_dim standard normal block drawn once per sequence and repeated at
// every step, concatenated per step as [step | static].
struct LatentSpec {
    index_t step_dim = 10;
    index_t static_dim = 10;
    index_t T = 0;

    index_t dim() const { return step_dim + static_dim; }
};

// Per sequence, the per-step block is drawn first (time-major) and the
// static block after it, so a fixed seed pins the exact batch.
SequenceBatch sample_latent(const LatentSpec& spec, index_t m, Rng& rng);

// One recurrent layer. The cell is a standard LSTM:
//   i_t = sigmoid(z_t Wi + h_{t-1} Ui + bi)
//   f_t = sigmoid(z_t Wf + h_{t-1} Uf + bf)
//   o_t = sigmoid(z_t Wo + h_{t-1} Uo + bo)
//   g_t = tanh  (z_t Wg + h_{t-1} Ug + bg)
//   c_t = f_t * c_{t-1} + i_t * g_t,   h_t = o_t * tanh(c_t)
// with h_0 = c_0 = 0 and the four gate blocks packed [i|f|o|g] along the
// last axis of w_ih [in,4H], w_hh [H,4H], bias [4H].
struct LstmLayerParams {
    Tensor w_ih;
    Tensor w_hh;
    Tensor bias;
};

// One or two stacked LSTM layers; the last hidden state passes through a
// rectified fully connected layer and a linear one, then the head.
struct GeneratorParams {
    std::vector<LstmLayerParams> layers;
    Tensor fc1_w;  // [H, F]
    Tensor fc1_b;  // [F]
    Tensor fc2_w;  // [F, d]
    Tensor fc2_b;  // [d]
    HeadKind head = HeadKind::Linear;

    index_t input_dim() const { return layers.empty() ? 0 : layers.front().w_ih.extent(0); }
    index_t hidden_dim() const { return layers.empty() ? 0 : layers.front().w_hh.extent(0); }
    index_t output_dim() const { return fc2_b.extent(0); }
};

// Weights uniform in +-1/sqrt(fan-in), biases zero; lstm_layers is 1 or 2.
GeneratorParams init_generator(index_t latent_dim, index_t lstm_hidden, index_t lstm_layers,
                               index_t fc_hidden, index_t d, HeadKind head, Rng& rng);

std::vector<std::pair<std::string, Tensor*>> named_parameters(GeneratorParams& p);

struct LstmLayerVars {
    Var w_ih, w_hh, bias;
};

struct GeneratorVars {
    std::vector<LstmLayerVars> layers;
    Var fc1_w, fc1_b, fc2_w, fc2_b;
    HeadKind head = HeadKind::Linear;
};

GeneratorVars generator_leaves(Tape& tape, const GeneratorParams& p);

// [m,T,latent_dim] -> [m,T,d], unrolled over T on the tape.
Var generator_forward(const GeneratorVars& gen, Var latents);
SequenceBatch generator_forward(const GeneratorParams& gen, const SequenceBatch& latents);

// Clamps every parameter of the baseline feature network into [-clip, clip].
void clip_weights(TraceNetParams& p, double clip);

}  // namespace cotgan
