#include "cotgan/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "cotgan/checkpoint.hpp"
#include "cotgan/divergences.hpp"

namespace cotgan {

double lr_schedule(double eta0, double rate, index_t step, double frequency) {
    if (!(rate > 0.0) || rate > 1.0)
        throw std::invalid_argument("lr_schedule: rate must lie in (0, 1]");
    if (!(frequency > 0.0))
        throw std::invalid_argument("lr_schedule: frequency must be positive");
    return eta0 * std::pow(rate, static_cast<double>(step) / frequency);
}

void validate(const TrainConfig& cfg) {
    if (cfg.m < 2) throw std::invalid_argument("TrainConfig: m must be at least 2");
    if (!(cfg.eps > 0.0)) throw std::invalid_argument("TrainConfig: eps must be positive");
    if (cfg.sinkhorn_iters < 1)
        throw std::invalid_argument("TrainConfig: sinkhorn_iters must be at least 1");
    if (!(cfg.lambda >= 0.0))
        throw std::invalid_argument("TrainConfig: lambda must be nonnegative");
    if (cfg.iterations < 0)
        throw std::invalid_argument("TrainConfig: iterations must be nonnegative");
    if (!(cfg.eta0 > 0.0)) throw std::invalid_argument("TrainConfig: eta0 must be positive");
    if (!(cfg.decay_rate > 0.0) || cfg.decay_rate > 1.0)
        throw std::invalid_argument("TrainConfig: decay_rate must lie in (0, 1]");
    if (!(cfg.decay_every > 0.0))
        throw std::invalid_argument("TrainConfig: decay_every must be positive");
    if (cfg.T < 1 || cfg.d < 1)
        throw std::invalid_argument("TrainConfig: T and d must match the data source");
    if (cfg.latent_step_dim < 1 || cfg.latent_static_dim < 1)
        throw std::invalid_argument("TrainConfig: latent dimensions must be positive");
    if (cfg.lstm_hidden < 1 || cfg.fc_hidden < 1 || cfg.disc_hidden < 1 || cfg.trace_dim < 1)
        throw std::invalid_argument("TrainConfig: network widths must be positive");
    if (cfg.lstm_layers < 1 || cfg.lstm_layers > 2)
        throw std::invalid_argument("TrainConfig: lstm_layers must be 1 or 2");
    if (!(cfg.eta > 0.0)) throw std::invalid_argument("TrainConfig: eta must be positive");
    if (cfg.flush_every < 1)
        throw std::invalid_argument("TrainConfig: flush_every must be at least 1");
    if (cfg.checkpoint_every < 0)
        throw std::invalid_argument("TrainConfig: checkpoint_every must be nonnegative");
}

const char* dataset_name(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::Ar1: return "ar1";
        case DatasetKind::Oscillation: return "oscillation";
        case DatasetKind::Sinusoid: return "sinusoid";
        case DatasetKind::Csv: return "csv";
    }
    throw std::invalid_argument("dataset_name: unknown kind");
}

DatasetKind parse_dataset_kind(const std::string& name) {
    if (name == "ar1") return DatasetKind::Ar1;
    if (name == "oscillation") return DatasetKind::Oscillation;
    if (name == "sinusoid") return DatasetKind::Sinusoid;
    if (name == "csv") return DatasetKind::Csv;
    throw std::invalid_argument("parse_dataset_kind: unknown dataset '" + name + "'");
}

std::pair<index_t, index_t> dataset_dims(const DatasetSpec& spec) {
    switch (spec.kind) {
        case DatasetKind::Ar1: return {spec.ar1.T, spec.ar1.d};
        case DatasetKind::Oscillation: return {spec.oscillation.T, spec.oscillation.d};
        case DatasetKind::Sinusoid: return {spec.sinusoid.T, 1};
        case DatasetKind::Csv: return {spec.csv_T, spec.csv_d};
    }
    throw std::invalid_argument("dataset_dims: unknown kind");
}

DataSource make_data_source(const DatasetSpec& spec) {
    switch (spec.kind) {
        case DatasetKind::Ar1: {
            const Ar1Spec s = spec.ar1;
            return [s](index_t m, Rng& rng) { return gen_ar1(s, m, rng); };
        }
        case DatasetKind::Oscillation: {
            const OscillationSpec s = spec.oscillation;
            return [s](index_t m, Rng& rng) { return gen_noisy_oscillation(s, m, rng); };
        }
        case DatasetKind::Sinusoid: {
            const SinusoidSpec s = spec.sinusoid;
            return [s](index_t m, Rng& rng) { return gen_sinusoids(s, m, rng).batch; };
        }
        case DatasetKind::Csv: {
            if (spec.csv_T < 1 || spec.csv_d < 1)
                throw std::invalid_argument("make_data_source: csv_T and csv_d must be set");
            SequenceBatch loaded = load_csv_sequences(spec.csv_path, spec.csv_T, spec.csv_d);
            if (spec.csv_preprocess) loaded = preprocess_standardize_tanh(loaded);
            auto pool = std::make_shared<SequenceBatch>(std::move(loaded));
            return [pool](index_t m, Rng& rng) {
                SequenceBatch out(m, pool->T, pool->d);
                const index_t row = pool->T * pool->d;
                for (index_t i = 0; i < m; ++i) {
                    const index_t src = rng.uniform_int(pool->m);
                    for (index_t f = 0; f < row; ++f)
                        out.values.data[static_cast<std::size_t>(i * row + f)] =
                            pool->values.data[static_cast<std::size_t>(src * row + f)];
                }
                return out;
            };
        }
    }
    throw std::invalid_argument("make_data_source: unknown kind");
}

OptimizerState init_optimizer(const std::vector<std::pair<std::string, Tensor*>>& params) {
    OptimizerState opt;
    opt.slots.reserve(params.size());
    for (const auto& [name, tensor] : params) {
        (void)name;
        AdamMoments mom;
        mom.m1 = Tensor(tensor->shape);
        mom.m2 = Tensor(tensor->shape);
        opt.slots.push_back(std::move(mom));
    }
    return opt;
}

namespace {

void check_update_args(const std::vector<std::pair<std::string, Tensor*>>& params,
                       const std::vector<Tensor>& grads, const char* who) {
    if (grads.size() != params.size())
        throw std::invalid_argument(std::string(who) + ": got " + std::to_string(grads.size()) +
                                    " gradients for " + std::to_string(params.size()) +
                                    " parameters");
    for (std::size_t i = 0; i < params.size(); ++i)
        if (grads[i].shape != params[i].second->shape)
            throw std::invalid_argument(std::string(who) + ": gradient shape mismatch at " +
                                        params[i].first);
}

}  // namespace

void adam_update(const std::vector<std::pair<std::string, Tensor*>>& params,
                 const std::vector<Tensor>& grads, OptimizerState& opt, double alpha,
                 double direction, double beta1, double beta2, double eps) {
    check_update_args(params, grads, "adam_update");
    if (opt.slots.size() != params.size())
        throw std::invalid_argument("adam_update: optimizer state holds " +
                                    std::to_string(opt.slots.size()) + " slots for " +
                                    std::to_string(params.size()) + " parameters");
    opt.t += 1;
    opt.b1t *= beta1;
    opt.b2t *= beta2;
    const double c1 = 1.0 - opt.b1t;
    const double c2 = 1.0 - opt.b2t;
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& w = *params[p].second;
        AdamMoments& mom = opt.slots[p];
        if (mom.m1.shape != w.shape)
            throw std::invalid_argument("adam_update: moment shape mismatch at " + params[p].first);
        for (std::size_t i = 0; i < w.data.size(); ++i) {
            const double g = grads[p].data[i];
            const double m1 = beta1 * mom.m1.data[i] + (1.0 - beta1) * g;
            const double m2 = beta2 * mom.m2.data[i] + (1.0 - beta2) * g * g;
            mom.m1.data[i] = m1;
            mom.m2.data[i] = m2;
            w.data[i] += direction * alpha * (m1 / c1) / (std::sqrt(m2 / c2) + eps);
        }
    }
}

void sgd_update(const std::vector<std::pair<std::string, Tensor*>>& params,
                const std::vector<Tensor>& grads, double alpha, double direction) {
    check_update_args(params, grads, "sgd_update");
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& w = *params[p].second;
        for (std::size_t i = 0; i < w.data.size(); ++i)
            w.data[i] += direction * alpha * grads[p].data[i];
    }
}

TrainState init_train_state(const TrainConfig& cfg) {
    validate(cfg);
    TrainState state;
    Rng root(cfg.seed);
    Rng init_rng = root.derive(1);
    state.gen = init_generator(cfg.latent_step_dim + cfg.latent_static_dim, cfg.lstm_hidden,
                               cfg.lstm_layers, cfg.fc_hidden, cfg.d, cfg.gen_head, init_rng);
    state.disc = init_causal_cost(cfg.d, cfg.disc_hidden, cfg.trace_dim, cfg.disc_head, cfg.eta,
                                  init_rng);
    state.gen_opt = init_optimizer(named_parameters(state.gen));
    state.disc_opt = init_optimizer(named_parameters(state.disc));
    state.rng = root.derive(2);
    return state;
}

namespace {

Var flatten_rows(Var x) {
    const Tensor& v = x.tape->value(x);
    return reshape(x, {v.extent(0), v.extent(1) * v.extent(2)});
}

// Matches the plain pairwise_cost kernel term for term, so a frozen cost
// family reproduces the plain divergence bitwise.
Var base_cost_matrix(Var x, Var y, BaseCost kind) {
    Var xf = flatten_rows(x);
    Var yf = flatten_rows(y);
    if (kind == BaseCost::SquaredL2) return pairwise_sqdist(xf, yf);
    const Tensor& xv = x.tape->value(xf);
    const Tensor& yv = y.tape->value(yf);
    Var rx = reshape(xf, {xv.extent(0), 1, xv.extent(1)});
    Var ry = reshape(yf, {1, yv.extent(0), yv.extent(1)});
    return sum(abs(sub(rx, ry)), 2);
}

}  // namespace

MixedObjective mixed_objective(Tape& tape, const TraceNetVars& h_net, const TraceNetVars& m_net,
                               Var x, Var x_prime, Var y, Var y_prime, BaseCost base, double eps,
                               index_t iters, index_t* calls) {
    const Tensor& xv = tape.value(x);
    if (xv.rank() != 3)
        throw std::invalid_argument("mixed_objective: batches must be [m,T,d], got " +
                                    shape_to_string(xv.shape));
    for (Var v : {x_prime, y, y_prime})
        if (tape.value(v).shape != xv.shape)
            throw std::invalid_argument("mixed_objective: the four batches must share one shape");
    const Tensor a = uniform_weights(xv.extent(0));

    Var h_y = causal_forward(h_net, y);
    Var h_yp = causal_forward(h_net, y_prime);
    Var h_xp = causal_forward(h_net, x_prime);
    Var m_x = causal_forward(m_net, x);
    Var m_xp = causal_forward(m_net, x_prime);
    Var m_y = causal_forward(m_net, y);

    auto w = [&](Var row, Var col, Var h_col, Var m_row) {
        Var cost = assemble_causal_cost(base_cost_matrix(row, col, base), h_col, m_row);
        if (calls != nullptr) ++*calls;
        return sinkhorn_sharp(cost, a, a, eps, iters);
    };
    Var w_xy = w(x, y, h_y, m_x);
    Var w_xxp = w(x, x_prime, h_xp, m_x);
    Var w_xpyp = w(x_prime, y_prime, h_yp, m_xp);
    Var w_yyp = w(y, y_prime, h_yp, m_y);

    MixedObjective out;
    out.mixed = add(sub(w_xy, w_xxp), sub(w_xpyp, w_yyp));
    out.m_x_traces = m_x;
    return out;
}

namespace {

TraceNetVars frozen_trace_net(Tape& tape, const TraceNetParams& p) {
    TraceNetVars v;
    v.conv1_w = tape.constant(p.conv1_w);
    v.conv1_b = tape.constant(p.conv1_b);
    v.conv2_w = tape.constant(p.conv2_w);
    v.conv2_b = tape.constant(p.conv2_b);
    v.head_w = tape.constant(p.head_w);
    v.head_b = tape.constant(p.head_b);
    v.head = p.head;
    return v;
}

// Same order as named_parameters on the matching parameter struct.
std::vector<Var> leaf_vars(const TraceNetVars& h, const TraceNetVars& m) {
    return {h.conv1_w, h.conv1_b, h.conv2_w, h.conv2_b, h.head_w, h.head_b,
            m.conv1_w, m.conv1_b, m.conv2_w, m.conv2_b, m.head_w, m.head_b};
}

std::vector<Var> leaf_vars(const GeneratorVars& gen) {
    std::vector<Var> out;
    for (const auto& lay : gen.layers) {
        out.push_back(lay.w_ih);
        out.push_back(lay.w_hh);
        out.push_back(lay.bias);
    }
    out.push_back(gen.fc1_w);
    out.push_back(gen.fc1_b);
    out.push_back(gen.fc2_w);
    out.push_back(gen.fc2_b);
    return out;
}

SequenceBatch draw_batch(const DataSource& data, const TrainConfig& cfg, Rng& rng) {
    SequenceBatch b = data(cfg.m, rng);
    if (b.m != cfg.m || b.T != cfg.T || b.d != cfg.d)
        throw std::invalid_argument(
            "train: data source produced [" + std::to_string(b.m) + "," + std::to_string(b.T) +
            "," + std::to_string(b.d) + "], config expects [" + std::to_string(cfg.m) + "," +
            std::to_string(cfg.T) + "," + std::to_string(cfg.d) + "]");
    return b;
}

struct StepBatches {
    SequenceBatch x;
    SequenceBatch x_prime;
    SequenceBatch z;
    SequenceBatch z_prime;
};

StepBatches sample_step_batches(TrainState& state, const TrainConfig& cfg,
                                const DataSource& data) {
    const LatentSpec latent{cfg.latent_step_dim, cfg.latent_static_dim, cfg.T};
    StepBatches b;
    b.x = draw_batch(data, cfg, state.rng);
    b.x_prime = draw_batch(data, cfg, state.rng);
    b.z = sample_latent(latent, cfg.m, state.rng);
    b.z_prime = sample_latent(latent, cfg.m, state.rng);
    return b;
}

std::vector<Tensor> collect_grads(const Tape& tape, const std::vector<Var>& leaves) {
    std::vector<Tensor> grads;
    grads.reserve(leaves.size());
    for (Var leaf : leaves) grads.push_back(tape.grad(leaf));
    return grads;
}

}  // namespace

StepReport discriminator_step(TrainState& state, const TrainConfig& cfg, const DataSource& data) {
    validate(cfg);
    if (!data) throw std::invalid_argument("discriminator_step: data source is empty");
    const StepBatches b = sample_step_batches(state, cfg, data);
    // Shapes are consistent from here on, so anything thrown below is a
    // mid-training anomaly and deserves the iteration stamp.
    try {
        const SequenceBatch y = generator_forward(state.gen, b.z);
        const SequenceBatch y_prime = generator_forward(state.gen, b.z_prime);

        Tape tape;
        TraceNetVars h_net = trace_net_leaves(tape, state.disc.h_net);
        TraceNetVars m_net = trace_net_leaves(tape, state.disc.m_net);
        MixedObjective mo = mixed_objective(
            tape, h_net, m_net, tape.constant(b.x.values), tape.constant(b.x_prime.values),
            tape.constant(y.values), tape.constant(y_prime.values), cfg.base_cost, cfg.eps,
            cfg.sinkhorn_iters, &state.sinkhorn_calls);
        Var penalty = martingale_penalty(mo.m_x_traces, state.disc.eta);
        Var objective = sub(mo.mixed, scale(penalty, cfg.lambda));

        StepReport rep;
        rep.mixed = tape.scalar_value(mo.mixed);
        rep.penalty = tape.scalar_value(penalty);
        if (!std::isfinite(tape.scalar_value(objective)))
            throw std::runtime_error("objective is not finite");
        tape.backward(objective);

        const std::vector<Tensor> grads = collect_grads(tape, leaf_vars(h_net, m_net));
        const double alpha =
            lr_schedule(cfg.eta0, cfg.decay_rate, state.iteration, cfg.decay_every);
        if (cfg.use_adam)
            adam_update(named_parameters(state.disc), grads, state.disc_opt, alpha, 1.0);
        else
            sgd_update(named_parameters(state.disc), grads, alpha, 1.0);
        return rep;
    } catch (const std::exception& e) {
        throw std::runtime_error("discriminator_step: iteration " +
                                 std::to_string(state.iteration) + ": " + e.what());
    }
}

StepReport generator_step(TrainState& state, const TrainConfig& cfg, const DataSource& data) {
    validate(cfg);
    if (!data) throw std::invalid_argument("generator_step: data source is empty");
    const StepBatches b = sample_step_batches(state, cfg, data);
    try {
        Tape tape;
        GeneratorVars gen = generator_leaves(tape, state.gen);
        TraceNetVars h_net = frozen_trace_net(tape, state.disc.h_net);
        TraceNetVars m_net = frozen_trace_net(tape, state.disc.m_net);
        Var y = generator_forward(gen, tape.constant(b.z.values));
        Var y_prime = generator_forward(gen, tape.constant(b.z_prime.values));
        MixedObjective mo = mixed_objective(
            tape, h_net, m_net, tape.constant(b.x.values), tape.constant(b.x_prime.values), y,
            y_prime, cfg.base_cost, cfg.eps, cfg.sinkhorn_iters, &state.sinkhorn_calls);

        StepReport rep;
        rep.mixed = tape.scalar_value(mo.mixed);
        if (!std::isfinite(rep.mixed)) throw std::runtime_error("objective is not finite");
        tape.backward(mo.mixed);

        const std::vector<Tensor> grads = collect_grads(tape, leaf_vars(gen));
        const double alpha =
            lr_schedule(cfg.eta0, cfg.decay_rate, state.iteration, cfg.decay_every);
        if (cfg.use_adam)
            adam_update(named_parameters(state.gen), grads, state.gen_opt, alpha, -1.0);
        else
            sgd_update(named_parameters(state.gen), grads, alpha, -1.0);
        return rep;
    } catch (const std::exception& e) {
        throw std::runtime_error("generator_step: iteration " + std::to_string(state.iteration) +
                                 ": " + e.what());
    }
}

namespace {

void flush_metrics(const std::filesystem::path& path, const std::vector<MetricRow>& history,
                   std::size_t& flushed) {
    if (path.empty() || flushed == history.size()) return;
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    std::ofstream os(path, std::ios::app);
    if (!os) throw std::runtime_error("train: cannot open metrics file " + path.string());
    os << std::setprecision(17);
    if (fresh) os << "iteration,mixed_divergence,penalty,lr,wall_ms\n";
    for (; flushed < history.size(); ++flushed) {
        const MetricRow& r = history[flushed];
        os << r.iteration << ',' << r.mixed << ',' << r.penalty << ',' << r.lr << ','
           << r.wall_ms << '\n';
    }
}

}  // namespace

void train(TrainState& state, const TrainConfig& cfg, const DataSource& data,
           const TrainPaths& paths) {
    validate(cfg);
    if (!data) throw std::invalid_argument("train: data source is empty");
    std::size_t flushed = state.history.size();
    while (state.iteration < cfg.iterations) {
        const auto start = std::chrono::steady_clock::now();
        const StepReport disc = discriminator_step(state, cfg, data);
        const StepReport gen = generator_step(state, cfg, data);
        const auto stop = std::chrono::steady_clock::now();

        MetricRow row;
        row.iteration = state.iteration;
        row.mixed = gen.mixed;
        row.penalty = disc.penalty;
        row.lr = lr_schedule(cfg.eta0, cfg.decay_rate, state.iteration, cfg.decay_every);
        row.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
        state.history.push_back(row);
        state.iteration += 1;

        if (state.history.size() - flushed >= static_cast<std::size_t>(cfg.flush_every))
            flush_metrics(paths.metrics_csv, state.history, flushed);
        if (cfg.checkpoint_every > 0 && !paths.checkpoint_dir.empty() &&
            state.iteration % cfg.checkpoint_every == 0)
            save_checkpoint(paths.checkpoint_dir, state);
    }
    flush_metrics(paths.metrics_csv, state.history, flushed);
    if (!paths.checkpoint_dir.empty()) save_checkpoint(paths.checkpoint_dir, state);
}

namespace {

void append_moments(NamedTensors& entries, const std::string& prefix,
                    const std::vector<std::pair<std::string, Tensor*>>& params,
                    const OptimizerState& opt) {
    if (opt.slots.size() != params.size())
        throw std::runtime_error("save_checkpoint: optimizer state does not match parameters");
    for (std::size_t i = 0; i < params.size(); ++i) {
        entries.emplace_back("adam." + prefix + "." + params[i].first + ".m1", opt.slots[i].m1);
        entries.emplace_back("adam." + prefix + "." + params[i].first + ".m2", opt.slots[i].m2);
    }
}

std::map<std::string, std::string> parse_manifest(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("load_checkpoint: malformed manifest line '" + line + "'");
        out[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return out;
}

const std::string& manifest_value(const std::map<std::string, std::string>& manifest,
                                  const std::string& key) {
    const auto it = manifest.find(key);
    if (it == manifest.end())
        throw std::runtime_error("load_checkpoint: manifest is missing '" + key + "'");
    return it->second;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const TrainState& state) {
    TrainState snap = state;
    NamedTensors entries;
    for (const auto& [name, t] : named_parameters(snap.gen)) entries.emplace_back("gen." + name, *t);
    for (const auto& [name, t] : named_parameters(snap.disc))
        entries.emplace_back("disc." + name, *t);
    append_moments(entries, "gen", named_parameters(snap.gen), snap.gen_opt);
    append_moments(entries, "disc", named_parameters(snap.disc), snap.disc_opt);
    save_tensor_map(dir, entries);

    std::ostringstream manifest;
    manifest << std::setprecision(17);
    manifest << "iteration=" << snap.iteration << "\n";
    manifest << "sinkhorn_calls=" << snap.sinkhorn_calls << "\n";
    manifest << "gen_opt_t=" << snap.gen_opt.t << "\n";
    manifest << "gen_opt_b1t=" << snap.gen_opt.b1t << "\n";
    manifest << "gen_opt_b2t=" << snap.gen_opt.b2t << "\n";
    manifest << "disc_opt_t=" << snap.disc_opt.t << "\n";
    manifest << "disc_opt_b1t=" << snap.disc_opt.b1t << "\n";
    manifest << "disc_opt_b2t=" << snap.disc_opt.b2t << "\n";
    manifest << "rng=" << snap.rng.serialize() << "\n";
    write_text_file(dir / "manifest.txt", manifest.str());
}

TrainState load_checkpoint(const std::filesystem::path& dir, const TrainConfig& cfg) {
    TrainState state = init_train_state(cfg);
    const NamedTensors entries = load_tensor_map(dir);
    std::map<std::string, const Tensor*> by_name;
    for (const auto& [name, t] : entries) by_name[name] = &t;
    auto fetch = [&by_name](const std::string& name, Tensor& dst) {
        const auto it = by_name.find(name);
        if (it == by_name.end())
            throw std::runtime_error("load_checkpoint: checkpoint is missing tensor '" + name +
                                     "'");
        if (it->second->shape != dst.shape)
            throw std::runtime_error("load_checkpoint: shape of '" + name +
                                     "' disagrees with the config");
        dst = *it->second;
    };
    for (const auto& [name, t] : named_parameters(state.gen)) fetch("gen." + name, *t);
    for (const auto& [name, t] : named_parameters(state.disc)) fetch("disc." + name, *t);
    const auto gen_params = named_parameters(state.gen);
    for (std::size_t i = 0; i < gen_params.size(); ++i) {
        fetch("adam.gen." + gen_params[i].first + ".m1", state.gen_opt.slots[i].m1);
        fetch("adam.gen." + gen_params[i].first + ".m2", state.gen_opt.slots[i].m2);
    }
    const auto disc_params = named_parameters(state.disc);
    for (std::size_t i = 0; i < disc_params.size(); ++i) {
        fetch("adam.disc." + disc_params[i].first + ".m1", state.disc_opt.slots[i].m1);
        fetch("adam.disc." + disc_params[i].first + ".m2", state.disc_opt.slots[i].m2);
    }

    const auto manifest = parse_manifest(read_text_file(dir / "manifest.txt"));
    state.iteration = std::stoll(manifest_value(manifest, "iteration"));
    state.sinkhorn_calls = std::stoll(manifest_value(manifest, "sinkhorn_calls"));
    state.gen_opt.t = std::stoll(manifest_value(manifest, "gen_opt_t"));
    state.gen_opt.b1t = std::stod(manifest_value(manifest, "gen_opt_b1t"));
    state.gen_opt.b2t = std::stod(manifest_value(manifest, "gen_opt_b2t"));
    state.disc_opt.t = std::stoll(manifest_value(manifest, "disc_opt_t"));
    state.disc_opt.b1t = std::stod(manifest_value(manifest, "disc_opt_b1t"));
    state.disc_opt.b2t = std::stod(manifest_value(manifest, "disc_opt_b2t"));
    state.rng = Rng::deserialize(manifest_value(manifest, "rng"));
    return state;
}

}  // namespace cotgan
