#include "cotgan/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "cotgan/causal.hpp"
#include "cotgan/divergences.hpp"
#include "cotgan/eval.hpp"
#include "cotgan/nets.hpp"
#include "cotgan/ot.hpp"
#include "cotgan/synthetic.hpp"

namespace cotgan {
namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string field;
    while (std::getline(ss, field, sep)) out.push_back(trim(field));
    return out;
}

index_t parse_int(const std::string& v, const std::string& what) {
    try {
        std::size_t used = 0;
        const long long n = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return static_cast<index_t>(n);
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": expected an integer, got '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& v, const std::string& what) {
    try {
        std::size_t used = 0;
        const unsigned long long n = std::stoull(v, &used);
        if (used != v.size() || !v.empty() && v[0] == '-') throw std::invalid_argument("");
        return static_cast<std::uint64_t>(n);
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": expected a non-negative integer, got '" + v + "'");
    }
}

double parse_real(const std::string& v, const std::string& what) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": expected a number, got '" + v + "'");
    }
}

bool parse_bool(const std::string& v, const std::string& what) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument(what + ": expected true or false, got '" + v + "'");
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* base_cost_name(BaseCost b) { return b == BaseCost::SquaredL2 ? "squared_l2" : "l1"; }

BaseCost parse_base_cost(const std::string& v) {
    if (v == "squared_l2") return BaseCost::SquaredL2;
    if (v == "l1") return BaseCost::L1;
    throw std::invalid_argument("cost: expected squared_l2 or l1, got '" + v + "'");
}

// Staged dataset fields resolved against the selected kind's own defaults,
// for manifest output.
index_t resolved_T(const RunConfig& c) {
    if (c.data_T > 0) return c.data_T;
    switch (parse_dataset_kind(c.data_kind)) {
        case DatasetKind::Ar1: return Ar1Spec{}.T;
        case DatasetKind::Oscillation: return OscillationSpec{}.T;
        case DatasetKind::Sinusoid: return SinusoidSpec{}.T;
        case DatasetKind::Csv: return 0;
    }
    return 0;
}

index_t resolved_d(const RunConfig& c) {
    if (c.data_d > 0) return c.data_d;
    switch (parse_dataset_kind(c.data_kind)) {
        case DatasetKind::Ar1: return Ar1Spec{}.d;
        case DatasetKind::Oscillation: return OscillationSpec{}.d;
        case DatasetKind::Sinusoid: return 1;
        case DatasetKind::Csv: return 0;
    }
    return 0;
}

struct KeyDef {
    std::string section;
    std::string key;
    std::string origin;  // "paper" or "chosen"
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

std::vector<KeyDef> build_key_table() {
    std::vector<KeyDef> t;
    auto add = [&t](const char* sec, const char* key, const char* origin,
                    std::function<void(RunConfig&, const std::string&)> set,
                    std::function<std::string(const RunConfig&)> get) {
        t.push_back({sec, key, origin, std::move(set), std::move(get)});
    };
    auto i64 = [](index_t RunConfig::* field) {
        return std::pair{
            std::function<void(RunConfig&, const std::string&)>(
                [field](RunConfig& c, const std::string& v) { c.*field = parse_int(v, "value"); }),
            std::function<std::string(const RunConfig&)>(
                [field](const RunConfig& c) { return std::to_string(c.*field); })};
    };
    (void)i64;

    add("train", "m", "paper",
        [](RunConfig& c, const std::string& v) { c.train.m = parse_int(v, "m"); },
        [](const RunConfig& c) { return std::to_string(c.train.m); });
    add("train", "eps", "paper",
        [](RunConfig& c, const std::string& v) { c.train.eps = parse_real(v, "eps"); },
        [](const RunConfig& c) { return format_real(c.train.eps); });
    add("train", "sinkhorn_iters", "paper",
        [](RunConfig& c, const std::string& v) {
            c.train.sinkhorn_iters = parse_int(v, "sinkhorn_iters");
        },
        [](const RunConfig& c) { return std::to_string(c.train.sinkhorn_iters); });
    add("train", "lambda", "paper",
        [](RunConfig& c, const std::string& v) { c.train.lambda = parse_real(v, "lambda"); },
        [](const RunConfig& c) { return format_real(c.train.lambda); });
    add("train", "iterations", "chosen",
        [](RunConfig& c, const std::string& v) { c.train.iterations = parse_int(v, "iterations"); },
        [](const RunConfig& c) { return std::to_string(c.train.iterations); });
    add("train", "seed", "chosen",
        [](RunConfig& c, const std::string& v) { c.train.seed = parse_u64(v, "seed"); },
        [](const RunConfig& c) { return std::to_string(c.train.seed); });
    add("train", "lr", "paper",
        [](RunConfig& c, const std::string& v) { c.train.eta0 = parse_real(v, "lr"); },
        [](const RunConfig& c) { return format_real(c.train.eta0); });
    add("train", "decay_rate", "paper",
        [](RunConfig& c, const std::string& v) { c.train.decay_rate = parse_real(v, "decay_rate"); },
        [](const RunConfig& c) { return format_real(c.train.decay_rate); });
    add("train", "decay_every", "paper",
        [](RunConfig& c, const std::string& v) {
            c.train.decay_every = parse_real(v, "decay_every");
        },
        [](const RunConfig& c) { return format_real(c.train.decay_every); });
    add("train", "adam", "paper",
        [](RunConfig& c, const std::string& v) { c.train.use_adam = parse_bool(v, "adam"); },
        [](const RunConfig& c) { return c.train.use_adam ? "true" : "false"; });
    add("train", "cost", "paper",
        [](RunConfig& c, const std::string& v) { c.train.base_cost = parse_base_cost(v); },
        [](const RunConfig& c) { return base_cost_name(c.train.base_cost); });
    add("train", "flush_every", "chosen",
        [](RunConfig& c, const std::string& v) { c.train.flush_every = parse_int(v, "flush_every"); },
        [](const RunConfig& c) { return std::to_string(c.train.flush_every); });
    add("train", "checkpoint_every", "chosen",
        [](RunConfig& c, const std::string& v) {
            c.train.checkpoint_every = parse_int(v, "checkpoint_every");
        },
        [](const RunConfig& c) { return std::to_string(c.train.checkpoint_every); });

    add("net", "latent_step_dim", "paper",
        [](RunConfig& c, const std::string& v) {
            c.train.latent_step_dim = parse_int(v, "latent_step_dim");
        },
        [](const RunConfig& c) { return std::to_string(c.train.latent_step_dim); });
    add("net", "latent_static_dim", "paper",
        [](RunConfig& c, const std::string& v) {
            c.train.latent_static_dim = parse_int(v, "latent_static_dim");
        },
        [](const RunConfig& c) { return std::to_string(c.train.latent_static_dim); });
    add("net", "lstm_hidden", "chosen",
        [](RunConfig& c, const std::string& v) { c.train.lstm_hidden = parse_int(v, "lstm_hidden"); },
        [](const RunConfig& c) { return std::to_string(c.train.lstm_hidden); });
    add("net", "lstm_layers", "paper",
        [](RunConfig& c, const std::string& v) { c.train.lstm_layers = parse_int(v, "lstm_layers"); },
        [](const RunConfig& c) { return std::to_string(c.train.lstm_layers); });
    add("net", "fc_hidden", "chosen",
        [](RunConfig& c, const std::string& v) { c.train.fc_hidden = parse_int(v, "fc_hidden"); },
        [](const RunConfig& c) { return std::to_string(c.train.fc_hidden); });
    add("net", "disc_hidden", "chosen",
        [](RunConfig& c, const std::string& v) { c.train.disc_hidden = parse_int(v, "disc_hidden"); },
        [](const RunConfig& c) { return std::to_string(c.train.disc_hidden); });
    add("net", "trace_dim", "chosen",
        [](RunConfig& c, const std::string& v) { c.train.trace_dim = parse_int(v, "trace_dim"); },
        [](const RunConfig& c) { return std::to_string(c.train.trace_dim); });
    add("net", "eta", "chosen",
        [](RunConfig& c, const std::string& v) { c.train.eta = parse_real(v, "eta"); },
        [](const RunConfig& c) { return format_real(c.train.eta); });
    add("net", "head", "chosen",
        [](RunConfig& c, const std::string& v) {
            if (v != "auto") parse_head_kind(v);
            c.head = v;
        },
        [](const RunConfig& c) { return c.head; });

    add("data", "kind", "chosen",
        [](RunConfig& c, const std::string& v) {
            parse_dataset_kind(v);
            c.data_kind = v;
        },
        [](const RunConfig& c) { return c.data_kind; });
    add("data", "T", "paper",
        [](RunConfig& c, const std::string& v) {
            c.data_T = parse_int(v, "T");
            if (c.data_T < 1) throw std::invalid_argument("T: must be at least 1");
        },
        [](const RunConfig& c) { return std::to_string(resolved_T(c)); });
    add("data", "d", "paper",
        [](RunConfig& c, const std::string& v) {
            c.data_d = parse_int(v, "d");
            if (c.data_d < 1) throw std::invalid_argument("d: must be at least 1");
        },
        [](const RunConfig& c) { return std::to_string(resolved_d(c)); });
    add("data", "burn_in", "chosen",
        [](RunConfig& c, const std::string& v) {
            c.burn_in = parse_int(v, "burn_in");
            if (c.burn_in < 0) throw std::invalid_argument("burn_in: must be non-negative");
        },
        [](const RunConfig& c) {
            return std::to_string(c.burn_in >= 0 ? c.burn_in : Ar1Spec{}.burn_in);
        });
    add("data", "theta_max", "paper",
        [](RunConfig& c, const std::string& v) { c.theta_max = parse_real(v, "theta_max"); },
        [](const RunConfig& c) {
            return format_real(c.theta_max != 0.0 ? c.theta_max : SinusoidSpec{}.theta_max);
        });
    add("data", "freq_lo", "paper",
        [](RunConfig& c, const std::string& v) { c.freq_lo = parse_real(v, "freq_lo"); },
        [](const RunConfig& c) {
            return format_real(c.freq_lo != 0.0 ? c.freq_lo : SinusoidSpec{}.freq_lo);
        });
    add("data", "freq_hi", "paper",
        [](RunConfig& c, const std::string& v) { c.freq_hi = parse_real(v, "freq_hi"); },
        [](const RunConfig& c) {
            return format_real(c.freq_hi != 0.0 ? c.freq_hi : SinusoidSpec{}.freq_hi);
        });
    add("data", "omega", "paper",
        [](RunConfig& c, const std::string& v) { c.omega = parse_real(v, "omega"); },
        [](const RunConfig& c) {
            return format_real(c.omega != 0.0 ? c.omega : OscillationSpec{}.omega);
        });
    add("data", "noise_std", "paper",
        [](RunConfig& c, const std::string& v) {
            c.noise_std = parse_real(v, "noise_std");
            if (c.noise_std < 0.0) throw std::invalid_argument("noise_std: must be non-negative");
        },
        [](const RunConfig& c) {
            return format_real(c.noise_std >= 0.0 ? c.noise_std : OscillationSpec{}.noise_std);
        });
    add("data", "path", "chosen",
        [](RunConfig& c, const std::string& v) { c.data_path = v; },
        [](const RunConfig& c) { return c.data_path; });
    add("data", "preprocess", "chosen",
        [](RunConfig& c, const std::string& v) { c.preprocess = parse_bool(v, "preprocess"); },
        [](const RunConfig& c) { return c.preprocess ? "true" : "false"; });

    add("out", "dir", "chosen",
        [](RunConfig& c, const std::string& v) { c.out_dir = v; },
        [](const RunConfig& c) { return c.out_dir; });

    add("sample", "run", "chosen",
        [](RunConfig& c, const std::string& v) { c.run_dir = v; },
        [](const RunConfig& c) { return c.run_dir; });
    add("sample", "samples", "chosen",
        [](RunConfig& c, const std::string& v) {
            c.samples = parse_int(v, "samples");
            if (c.samples < 1) throw std::invalid_argument("samples: must be at least 1");
        },
        [](const RunConfig& c) { return std::to_string(c.samples); });
    add("sample", "seed", "chosen",
        [](RunConfig& c, const std::string& v) { c.sample_seed = parse_u64(v, "seed"); },
        [](const RunConfig& c) { return std::to_string(c.sample_seed); });

    add("bias", "kinds", "chosen",
        [](RunConfig& c, const std::string& v) {
            for (const std::string& name : split(v, ',')) parse_divergence_kind(name);
            c.kinds = v;
        },
        [](const RunConfig& c) { return c.kinds; });
    add("bias", "thetas", "paper",
        [](RunConfig& c, const std::string& v) {
            for (const std::string& x : split(v, ',')) parse_real(x, "thetas");
            c.thetas = v;
        },
        [](const RunConfig& c) { return c.thetas; });
    add("bias", "ms", "paper",
        [](RunConfig& c, const std::string& v) {
            for (const std::string& x : split(v, ',')) parse_int(x, "ms");
            c.ms = v;
        },
        [](const RunConfig& c) { return c.ms; });
    add("bias", "replicates", "paper",
        [](RunConfig& c, const std::string& v) { c.replicates = parse_int(v, "replicates"); },
        [](const RunConfig& c) { return std::to_string(c.replicates); });
    add("bias", "eps", "paper",
        [](RunConfig& c, const std::string& v) { c.bias_eps = parse_real(v, "eps"); },
        [](const RunConfig& c) { return format_real(c.bias_eps); });
    add("bias", "iters", "paper",
        [](RunConfig& c, const std::string& v) { c.bias_iters = parse_int(v, "iters"); },
        [](const RunConfig& c) { return std::to_string(c.bias_iters); });
    add("bias", "mu_seed", "chosen",
        [](RunConfig& c, const std::string& v) { c.mu_seed = parse_u64(v, "mu_seed"); },
        [](const RunConfig& c) { return std::to_string(c.mu_seed); });
    add("bias", "nu_seed", "chosen",
        [](RunConfig& c, const std::string& v) { c.nu_seed = parse_u64(v, "nu_seed"); },
        [](const RunConfig& c) { return std::to_string(c.nu_seed); });

    add("sinkhorn", "cost", "chosen",
        [](RunConfig& c, const std::string& v) { c.cost_path = v; },
        [](const RunConfig& c) { return c.cost_path; });
    add("sinkhorn", "eps", "chosen",
        [](RunConfig& c, const std::string& v) { c.solver_eps = parse_real(v, "eps"); },
        [](const RunConfig& c) { return format_real(c.solver_eps); });
    add("sinkhorn", "iters", "chosen",
        [](RunConfig& c, const std::string& v) { c.solver_iters = parse_int(v, "iters"); },
        [](const RunConfig& c) { return std::to_string(c.solver_iters); });
    add("sinkhorn", "dump", "chosen",
        [](RunConfig& c, const std::string& v) { c.dump_path = v; },
        [](const RunConfig& c) { return c.dump_path; });

    add("check", "seed", "chosen",
        [](RunConfig& c, const std::string& v) { c.check_seed = parse_u64(v, "seed"); },
        [](const RunConfig& c) { return std::to_string(c.check_seed); });
    return t;
}

const std::vector<KeyDef>& key_table() {
    static const std::vector<KeyDef> defs = build_key_table();
    return defs;
}

const KeyDef* find_key(const std::string& section, const std::string& key) {
    for (const KeyDef& def : key_table())
        if (def.section == section && def.key == key) return &def;
    return nullptr;
}

bool section_known(const std::string& section) {
    for (const KeyDef& def : key_table())
        if (def.section == section) return true;
    return false;
}

// Where a flag lands depends on the subcommand: --m is the batch size for
// train but the batch-size list for bias-experiment, and --eps/--iters name
// the solver parameters under sinkhorn.
std::pair<std::string, std::string> flag_target(const std::string& sub, const std::string& flag) {
    if (sub == "bias-experiment") {
        if (flag == "m") return {"bias", "ms"};
        if (flag == "eps") return {"bias", "eps"};
        if (flag == "sinkhorn-iters") return {"bias", "iters"};
        if (flag == "kinds") return {"bias", "kinds"};
        if (flag == "thetas") return {"bias", "thetas"};
        if (flag == "replicates") return {"bias", "replicates"};
        if (flag == "mu-seed") return {"bias", "mu_seed"};
        if (flag == "nu-seed") return {"bias", "nu_seed"};
    }
    if (sub == "sinkhorn") {
        if (flag == "cost") return {"sinkhorn", "cost"};
        if (flag == "eps") return {"sinkhorn", "eps"};
        if (flag == "iters") return {"sinkhorn", "iters"};
        if (flag == "dump") return {"sinkhorn", "dump"};
    }
    if (sub == "oracle-check" && flag == "seed") return {"check", "seed"};
    if (sub == "generate" || sub == "evaluate") {
        if (flag == "run") return {"sample", "run"};
        if (flag == "samples") return {"sample", "samples"};
        if (flag == "sample-seed") return {"sample", "seed"};
    }
    static const std::map<std::string, std::pair<std::string, std::string>> shared = {
        {"m", {"train", "m"}},
        {"eps", {"train", "eps"}},
        {"sinkhorn-iters", {"train", "sinkhorn_iters"}},
        {"lr", {"train", "lr"}},
        {"lambda", {"train", "lambda"}},
        {"J", {"net", "trace_dim"}},
        {"seed", {"train", "seed"}},
        {"iters", {"train", "iterations"}},
        {"out", {"out", "dir"}},
        {"data", {"data", "kind"}},
        {"T", {"data", "T"}},
        {"d", {"data", "d"}},
        {"path", {"data", "path"}},
        {"theta-max", {"data", "theta_max"}},
        {"burn-in", {"data", "burn_in"}},
        {"head", {"net", "head"}},
        {"adam", {"train", "adam"}},
        {"cost", {"train", "cost"}},
        {"flush-every", {"train", "flush_every"}},
        {"checkpoint-every", {"train", "checkpoint_every"}},
        {"preprocess", {"data", "preprocess"}},
    };
    const auto it = shared.find(flag);
    if (it == shared.end()) throw std::invalid_argument("unknown flag --" + flag);
    return it->second;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::vector<ConfigEntry> parse_config_text(const std::string& text) {
    std::vector<ConfigEntry> out;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        const auto hash = s.find('#');
        if (hash != std::string::npos) s.erase(hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.size() < 3 || s.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(line) +
                                            ": malformed section header '" + s + "'");
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line) +
                                        ": expected key = value, got '" + s + "'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(line) + ": empty key");
        if (section.empty())
            throw std::invalid_argument("config line " + std::to_string(line) + ": key '" + key +
                                        "' outside any [section]");
        out.push_back({section, key, value, line});
    }
    return out;
}

ResolvedConfig resolve_config(const std::vector<ConfigEntry>& entries,
                              const std::vector<std::pair<std::string, std::string>>& flags,
                              const std::string& subcommand) {
    ResolvedConfig rc;
    for (const ConfigEntry& e : entries) {
        const KeyDef* def = find_key(e.section, e.key);
        if (!def) {
            if (!section_known(e.section))
                throw std::invalid_argument("config line " + std::to_string(e.line) +
                                            ": unknown section [" + e.section + "]");
            throw std::invalid_argument("config line " + std::to_string(e.line) +
                                        ": unknown key '" + e.key + "' in [" + e.section + "]");
        }
        try {
            def->set(rc.cfg, e.value);
        } catch (const std::invalid_argument& ex) {
            throw std::invalid_argument("config line " + std::to_string(e.line) + ": " + ex.what());
        }
        rc.explicit_keys.insert(e.section + "." + e.key);
    }
    for (const auto& [name, value] : flags) {
        if (name == "resume") {
            rc.cfg.resume = true;
            continue;
        }
        const auto [section, key] = flag_target(subcommand, name);
        const KeyDef* def = find_key(section, key);
        try {
            def->set(rc.cfg, value);
        } catch (const std::invalid_argument& ex) {
            throw std::invalid_argument("flag --" + name + ": " + ex.what());
        }
        rc.explicit_keys.insert(section + "." + key);
    }
    return rc;
}

DatasetSpec finalize_dataset(const RunConfig& cfg) {
    DatasetSpec spec;
    spec.kind = parse_dataset_kind(cfg.data_kind);
    switch (spec.kind) {
        case DatasetKind::Ar1:
            if (cfg.data_T > 0) spec.ar1.T = cfg.data_T;
            if (cfg.data_d > 0) spec.ar1.d = cfg.data_d;
            if (cfg.burn_in >= 0) spec.ar1.burn_in = cfg.burn_in;
            break;
        case DatasetKind::Oscillation:
            if (cfg.data_T > 0) spec.oscillation.T = cfg.data_T;
            if (cfg.data_d > 0) spec.oscillation.d = cfg.data_d;
            if (cfg.omega != 0.0) spec.oscillation.omega = cfg.omega;
            if (cfg.noise_std >= 0.0) spec.oscillation.noise_std = cfg.noise_std;
            break;
        case DatasetKind::Sinusoid:
            if (cfg.data_d > 1)
                throw std::invalid_argument("finalize_dataset: sinusoid data is one-channel");
            if (cfg.data_T > 0) spec.sinusoid.T = cfg.data_T;
            if (cfg.theta_max != 0.0) spec.sinusoid.theta_max = cfg.theta_max;
            if (cfg.freq_lo != 0.0) spec.sinusoid.freq_lo = cfg.freq_lo;
            if (cfg.freq_hi != 0.0) spec.sinusoid.freq_hi = cfg.freq_hi;
            break;
        case DatasetKind::Csv:
            if (cfg.data_path.empty())
                throw std::invalid_argument("finalize_dataset: csv data needs [data] path");
            if (cfg.data_T < 1 || cfg.data_d < 1)
                throw std::invalid_argument("finalize_dataset: csv data needs [data] T and d");
            spec.csv_path = cfg.data_path;
            spec.csv_T = cfg.data_T;
            spec.csv_d = cfg.data_d;
            spec.csv_preprocess = cfg.preprocess;
            break;
    }
    return spec;
}

HeadKind resolve_head(const RunConfig& cfg) {
    if (cfg.head != "auto") return parse_head_kind(cfg.head);
    switch (parse_dataset_kind(cfg.data_kind)) {
        case DatasetKind::Ar1: return HeadKind::Linear;
        case DatasetKind::Oscillation: return HeadKind::Sigmoid;
        case DatasetKind::Sinusoid: return HeadKind::Linear;
        case DatasetKind::Csv: return HeadKind::Tanh;
    }
    return HeadKind::Linear;
}

void write_manifest(const std::filesystem::path& path, const ResolvedConfig& resolved,
                    const std::string& subcommand) {
    static const std::map<std::string, std::vector<std::string>> sections = {
        {"train", {"train", "net", "data", "out"}},
        {"generate", {"sample", "out"}},
        {"evaluate", {"sample", "out"}},
        {"bias-experiment", {"bias", "out"}},
        {"sinkhorn", {"sinkhorn"}},
        {"oracle-check", {"check"}},
    };
    const auto it = sections.find(subcommand);
    if (it == sections.end())
        throw std::invalid_argument("write_manifest: unknown subcommand '" + subcommand + "'");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cli: cannot open " + path.string());
    out << "# " << kCliVersion << "\n";
    out << "# command: " << subcommand << "\n";
    out << "# rerun: cotgan " << subcommand << " --config " << path.filename().string() << "\n";
    for (const std::string& sec : it->second) {
        out << "\n[" << sec << "]\n";
        for (const KeyDef& def : key_table()) {
            if (def.section != sec) continue;
            const std::string origin = resolved.explicit_keys.count(sec + "." + def.key)
                                           ? std::string("set")
                                           : "default (" + def.origin + ")";
            out << def.key << " = " << def.get(resolved.cfg) << "  # " << origin << "\n";
        }
    }
}

namespace {

void print_usage(std::ostream& out) {
    out << "usage: cotgan <subcommand> [--config file] [--flag value ...]\n"
           "\n"
           "subcommands:\n"
           "  train            run adversarial training per config\n"
           "  generate         sample sequences from a trained run (--run <dir>)\n"
           "  evaluate         correlation and distribution reports for a run (--run <dir>)\n"
           "  bias-experiment  mini-batch bias curves over the sinusoid family\n"
           "  oracle-check     solver and causality property suite; exits 0 when clean\n"
           "  sinkhorn         solve one instance from a cost grid (--cost file.csv)\n"
           "\n"
           "common flags: --m --eps --sinkhorn-iters --lr --lambda --J --seed --iters\n"
           "              --out --data --T --d --path --theta-max --head --adam --resume\n"
           "config grammar: key = value lines under [train] [net] [data] [out] sections,\n"
           "# comments. Every output directory receives a manifest.cfg that reruns the\n"
           "experiment via --config.\n";
}

}  // namespace

}  // namespace cotgan
