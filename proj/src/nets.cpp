#include "cotgan/nets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cotgan {

SequenceBatch sample_latent(const LatentSpec& spec, index_t m, Rng& rng) {
    if (spec.step_dim < 1 || spec.static_dim < 1 || spec.T < 1)
        throw std::invalid_argument("sample_latent: spec dimensions must be positive");
    if (m < 1) throw std::invalid_argument("sample_latent: need m >= 1");
    SequenceBatch out(m, spec.T, spec.dim());
    for (index_t i = 0; i < m; ++i) {
        for (index_t t = 0; t < spec.T; ++t)
            for (index_t k = 0; k < spec.step_dim; ++k) out.values.at(i, t, k) = rng.normal();
        for (index_t k = 0; k < spec.static_dim; ++k) {
            const double z = rng.normal();
            for (index_t t = 0; t < spec.T; ++t) out.values.at(i, t, spec.step_dim + k) = z;
        }
    }
    return out;
}

namespace {

Tensor fan_in_uniform(Rng& rng, const Shape& shape, index_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    return rng.uniform_tensor(shape, -bound, bound);
}

}  // namespace

GeneratorParams init_generator(index_t latent_dim, index_t lstm_hidden, index_t lstm_layers,
                               index_t fc_hidden, index_t d, HeadKind head, Rng& rng) {
    if (latent_dim < 1 || lstm_hidden < 1 || fc_hidden < 1 || d < 1)
        throw std::invalid_argument("init_generator: dimensions must be positive");
    if (lstm_layers < 1 || lstm_layers > 2)
        throw std::invalid_argument("init_generator: lstm_layers must be 1 or 2");
    GeneratorParams p;
    index_t in = latent_dim;
    for (index_t l = 0; l < lstm_layers; ++l) {
        LstmLayerParams layer;
        layer.w_ih = fan_in_uniform(rng, {in, 4 * lstm_hidden}, in);
        layer.w_hh = fan_in_uniform(rng, {lstm_hidden, 4 * lstm_hidden}, lstm_hidden);
        layer.bias = Tensor({4 * lstm_hidden});
        p.layers.push_back(std::move(layer));
        in = lstm_hidden;
    }
    p.fc1_w = fan_in_uniform(rng, {lstm_hidden, fc_hidden}, lstm_hidden);
    p.fc1_b = Tensor({fc_hidden});
    p.fc2_w = fan_in_uniform(rng, {fc_hidden, d}, fc_hidden);
    p.fc2_b = Tensor({d});
    p.head = head;
    return p;
}

std::vector<std::pair<std::string, Tensor*>> named_parameters(GeneratorParams& p) {
    std::vector<std::pair<std::string, Tensor*>> out;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const std::string prefix = "lstm" + std::to_string(l + 1) + ".";
        out.emplace_back(prefix + "w_ih", &p.layers[l].w_ih);
        out.emplace_back(prefix + "w_hh", &p.layers[l].w_hh);
        out.emplace_back(prefix + "bias", &p.layers[l].bias);
    }
    out.emplace_back("fc1_w", &p.fc1_w);
    out.emplace_back("fc1_b", &p.fc1_b);
    out.emplace_back("fc2_w", &p.fc2_w);
    out.emplace_back("fc2_b", &p.fc2_b);
    return out;
}

GeneratorVars generator_leaves(Tape& tape, const GeneratorParams& p) {
    GeneratorVars v;
    for (const LstmLayerParams& layer : p.layers)
        v.layers.push_back({tape.leaf(layer.w_ih), tape.leaf(layer.w_hh), tape.leaf(layer.bias)});
    v.fc1_w = tape.leaf(p.fc1_w);
    v.fc1_b = tape.leaf(p.fc1_b);
    v.fc2_w = tape.leaf(p.fc2_w);
    v.fc2_b = tape.leaf(p.fc2_b);
    v.head = p.head;
    return v;
}

Var generator_forward(const GeneratorVars& gen, Var latents) {
    if (gen.layers.empty())
        throw std::invalid_argument("generator_forward: no recurrent layers");
    Tape& t = *latents.tape;
    const Tensor& zv = t.value(latents);
    if (zv.rank() != 3)
        throw std::invalid_argument("generator_forward: latents must be [m,T,z], got " +
                                    shape_to_string(zv.shape));
    const index_t m = zv.extent(0), T = zv.extent(1);
    const index_t H = t.value(gen.layers.front().w_hh).extent(0);

    std::vector<Var> h(gen.layers.size()), c(gen.layers.size());
    for (std::size_t l = 0; l < gen.layers.size(); ++l) {
        h[l] = t.constant(Tensor({m, H}));
        c[l] = t.constant(Tensor({m, H}));
    }
    std::vector<Var> steps;
    steps.reserve(static_cast<std::size_t>(T));
    for (index_t step = 0; step < T; ++step) {
        Var x = reshape(slice(latents, 1, step, 1), {m, t.value(latents).extent(2)});
        for (std::size_t l = 0; l < gen.layers.size(); ++l) {
            const LstmLayerVars& lay = gen.layers[l];
            Var pre = add(add(matmul(x, lay.w_ih), matmul(h[l], lay.w_hh)),
                          reshape(lay.bias, {1, 4 * H}));
            Var gi = sigmoid(slice(pre, 1, 0, H));
            Var gf = sigmoid(slice(pre, 1, H, H));
            Var go = sigmoid(slice(pre, 1, 2 * H, H));
            Var gg = tanh(slice(pre, 1, 3 * H, H));
            c[l] = add(mul(gf, c[l]), mul(gi, gg));
            h[l] = mul(go, tanh(c[l]));
            x = h[l];
        }
        Var u = relu(add(matmul(x, gen.fc1_w), reshape(gen.fc1_b, {1, t.value(gen.fc1_b).size()})));
        Var o = add(matmul(u, gen.fc2_w), reshape(gen.fc2_b, {1, t.value(gen.fc2_b).size()}));
        steps.push_back(reshape(o, {m, 1, t.value(gen.fc2_b).size()}));
    }
    Var out = concat(steps, 1);
    switch (gen.head) {
        case HeadKind::Linear: return out;
        case HeadKind::Sigmoid: return sigmoid(out);
        case HeadKind::Tanh: return tanh(out);
    }
    throw std::invalid_argument("generator_forward: bad HeadKind");
}

SequenceBatch generator_forward(const GeneratorParams& gen, const SequenceBatch& latents) {
    Tape t;
    GeneratorVars v;
    for (const LstmLayerParams& layer : gen.layers)
        v.layers.push_back(
            {t.constant(layer.w_ih), t.constant(layer.w_hh), t.constant(layer.bias)});
    v.fc1_w = t.constant(gen.fc1_w);
    v.fc1_b = t.constant(gen.fc1_b);
    v.fc2_w = t.constant(gen.fc2_w);
    v.fc2_b = t.constant(gen.fc2_b);
    v.head = gen.head;
    return SequenceBatch(t.value(generator_forward(v, t.constant(latents.values))));
}

void clip_weights(TraceNetParams& p, double clip) {
    if (!(clip > 0.0)) throw std::invalid_argument("clip_weights: clip must be positive");
    for (auto& [name, tensor] : named_parameters(p))
        for (double& v : tensor->data) v = std::clamp(v, -clip, clip);
}

}  // namespace cotgan
