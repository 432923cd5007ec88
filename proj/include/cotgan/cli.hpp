#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cotgan/trainer.hpp"

namespace cotgan {

inline constexpr const char* kCliVersion = "cotgan 0.1.0";

struct ConfigEntry {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
};

// key = value grammar with [section] headers, # comments (full-line and
// trailing), and blank lines. Throws std::invalid_argument carrying the line
// number on malformed input.
std::vector<ConfigEntry> parse_config_text(const std::string& text);

// Everything the subcommands consume. Dataset fields stage overrides that
// finalize_dataset applies to the selected kind; sentinels (0, -1, NaN) mean
// "keep the dataset default".
struct RunConfig {
    TrainConfig train;
    std::string head = "auto";  // auto | linear | sigmoid | tanh

    std::string data_kind = "ar1";
    index_t data_T = 0;
    index_t data_d = 0;
    index_t burn_in = -1;
    double theta_max = 0.0;  // 0 = default; valid values live in [0.3, 1.2]
    double freq_lo = 0.0;
    double freq_hi = 0.0;
    double omega = 0.0;
    double noise_std = -1.0;
    std::string data_path;
    bool preprocess = false;

    std::string out_dir;

    std::string run_dir;  // generate / evaluate source run
    index_t samples = 256;
    std::uint64_t sample_seed = 12345;

    std::string kinds = "sharp,sinkhorn_2term,mixed_4";
    std::string thetas = "0.4,0.5,0.6,0.7,0.8,0.9,1.0,1.1,1.2";
    std::string ms = "8,16,32,64";
    index_t replicates = 300;
    double bias_eps = 1.0;
    index_t bias_iters = 100;
    std::uint64_t mu_seed = 700001;
    std::uint64_t nu_seed = 900001;

    std::string cost_path;
    double solver_eps = 0.1;
    index_t solver_iters = 100;
    std::string dump_path;

    std::uint64_t check_seed = 20260822;

    bool resume = false;  // flag-only, never written to manifests
};

struct ResolvedConfig {
    RunConfig cfg;
    std::set<std::string> explicit_keys;  // "section.key" set via file or flag
};

// Applies file entries, then flag overrides, onto the defaults. Unknown
// sections, keys, and flags are rejected with their source location. The
// subcommand picks which section ambiguous flags (--m, --eps, --iters,
// --seed, --sinkhorn-iters) land in.
ResolvedConfig resolve_config(const std::vector<ConfigEntry>& entries,
                              const std::vector<std::pair<std::string, std::string>>& flags,
                              const std::string& subcommand);

// Builds the dataset spec from the staged fields; validates kind-specific
// requirements (csv needs path, T, d; sinusoid is one-channel).
DatasetSpec finalize_dataset(const RunConfig& cfg);

// The generator head the config implies: an explicit name wins, otherwise
// the dataset picks (ar1 and sinusoid linear, oscillation sigmoid, csv tanh).
HeadKind resolve_head(const RunConfig& cfg);

// Resolved config in the same grammar, one key per line, annotated with
// provenance: set explicitly, default (paper), or default (chosen). Feeding
// the file back through --config reproduces the run bit for bit.
void write_manifest(const std::filesystem::path& path, const ResolvedConfig& resolved,
                    const std::string& subcommand);

// Entry point without the program name. Returns the process exit code:
// 0 success, 1 validation error, 2 runtime failure.
int cli_run(const std::vector<std::string>& args);

}  // namespace cotgan
