#include "cotgan/synthetic.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cotgan {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

std::vector<double> ar1_coeffs(index_t d) {
    if (d <= 0) throw std::invalid_argument("ar1_coeffs: d must be positive");
    std::vector<double> a(static_cast<std::size_t>(d));
    if (d == 1) {
        a[0] = 0.5;
        return a;
    }
    for (index_t k = 0; k < d; ++k)
        a[static_cast<std::size_t>(k)] =
            0.1 + 0.8 * static_cast<double>(k) / static_cast<double>(d - 1);
    return a;
}

Tensor ar1_noise_cov(index_t d) {
    Tensor s({d, d});
    for (index_t i = 0; i < d; ++i)
        for (index_t j = 0; j < d; ++j) s.at(i, j) = i == j ? 1.0 : 0.5;
    return s;
}

Tensor cholesky_lower(const Tensor& sym) {
    if (sym.rank() != 2 || sym.extent(0) != sym.extent(1))
        throw std::invalid_argument("cholesky_lower: square matrix required, got " +
                                    shape_to_string(sym.shape));
    const index_t n = sym.extent(0);
    Tensor L({n, n});
    for (index_t i = 0; i < n; ++i) {
        for (index_t j = 0; j <= i; ++j) {
            double s = sym.at(i, j);
            for (index_t k = 0; k < j; ++k) s -= L.at(i, k) * L.at(j, k);
            if (i == j) {
                if (s <= 0.0)
                    throw std::runtime_error("cholesky_lower: matrix is not positive definite");
                L.at(i, i) = std::sqrt(s);
            } else {
                L.at(i, j) = s / L.at(j, j);
            }
        }
    }
    return L;
}

SequenceBatch gen_ar1(const Ar1Spec& spec, index_t m, Rng& rng) {
    if (m <= 0 || spec.T <= 0) throw std::invalid_argument("gen_ar1: m and T must be positive");
    const index_t d = spec.d;
    const std::vector<double> a = spec.a.empty() ? ar1_coeffs(d) : spec.a;
    if (static_cast<index_t>(a.size()) != d)
        throw std::invalid_argument("gen_ar1: coefficient count " + std::to_string(a.size()) +
                                    " does not match d=" + std::to_string(d));
    for (double ak : a)
        if (std::abs(ak) >= 1.0)
            throw std::invalid_argument("gen_ar1: |a_k| must be < 1 for stationarity, got " +
                                        std::to_string(ak));
    const Tensor L = cholesky_lower(ar1_noise_cov(d));
    SequenceBatch out(m, spec.T, d);
    std::vector<double> x(static_cast<std::size_t>(d)), z(static_cast<std::size_t>(d));
    for (index_t i = 0; i < m; ++i) {
        for (double& v : x) v = rng.normal();
        for (index_t t = 0; t < spec.burn_in + spec.T; ++t) {
            for (double& v : z) v = rng.normal();
            for (index_t k = 0; k < d; ++k) {
                double noise = 0.0;
                for (index_t l = 0; l <= k; ++l) noise += L.at(k, l) * z[static_cast<std::size_t>(l)];
                x[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)] + noise;
            }
            if (t >= spec.burn_in)
                for (index_t k = 0; k < d; ++k)
                    out.values.at(i, t - spec.burn_in, k) = x[static_cast<std::size_t>(k)];
        }
    }
    return out;
}

SequenceBatch gen_noisy_oscillation(const OscillationSpec& spec, index_t m, Rng& rng,
                                    Tensor* states_out) {
    if (m <= 0 || spec.T <= 0 || spec.d <= 0)
        throw std::invalid_argument("gen_noisy_oscillation: m, T, d must be positive");
    SequenceBatch out(m, spec.T, spec.d);
    if (states_out) *states_out = Tensor({m, spec.T, 2});
    const double ca = std::cos(spec.omega), sa = std::sin(spec.omega);
    for (index_t i = 0; i < m; ++i) {
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        double s1 = std::cos(phi), s2 = std::sin(phi);
        for (index_t t = 0; t < spec.T; ++t) {
            if (states_out) {
                states_out->at(i, t, 0) = s1;
                states_out->at(i, t, 1) = s2;
            }
            for (index_t p = 0; p < spec.d; ++p) {
                const double loc =
                    spec.d == 1 ? spec.loc_lo
                                : spec.loc_lo + (spec.loc_hi - spec.loc_lo) * static_cast<double>(p) /
                                      static_cast<double>(spec.d - 1);
                const double dist = loc - s1;
                out.values.at(i, t, p) =
                    std::exp(-dist * dist / (2.0 * spec.bump_width * spec.bump_width));
            }
            const double r = std::hypot(s1, s2);
            const double c = 1.0 / (r * (std::exp(-4.0 * (r - 0.3)) + 1.0));
            const double r1 = ca * s1 - sa * s2;
            const double r2 = sa * s1 + ca * s2;
            s1 = c * r1 + spec.noise_std * rng.normal();
            s2 = c * r2 + spec.noise_std * rng.normal();
        }
    }
    return out;
}

SinusoidSample gen_sinusoids(const SinusoidSpec& spec, index_t m, Rng& rng) {
    if (spec.theta_max < 0.3 || spec.theta_max > 1.2)
        throw std::invalid_argument("gen_sinusoids: theta_max must lie in [0.3, 1.2], got " +
                                    std::to_string(spec.theta_max));
    if (m <= 0 || spec.T <= 0) throw std::invalid_argument("gen_sinusoids: m and T must be positive");
    SinusoidSample s;
    s.batch = SequenceBatch(m, spec.T, 1);
    s.amplitude = Tensor({m});
    s.frequency = Tensor({m});
    s.phase = Tensor({m});
    for (index_t i = 0; i < m; ++i) {
        const double amp = rng.uniform(0.3, spec.theta_max);
        const double freq = rng.uniform(spec.freq_lo, spec.freq_hi);
        const double phase = rng.uniform(0.0, 2.0 * kPi);
        s.amplitude[i] = amp;
        s.frequency[i] = freq;
        s.phase[i] = phase;
        for (index_t t = 0; t < spec.T; ++t)
            s.batch.values.at(i, t, 0) =
                amp * std::sin(2.0 * kPi * freq * static_cast<double>(t) / static_cast<double>(spec.T) + phase);
    }
    return s;
}

namespace {

std::vector<double> parse_csv_row(const std::string& line, index_t row_number) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) comma = line.size();
        std::size_t b = pos, e = comma;
        while (b < e && (line[b] == ' ' || line[b] == '\t')) ++b;
        while (e > b && (line[e - 1] == ' ' || line[e - 1] == '\t' || line[e - 1] == '\r')) --e;
        double v = 0.0;
        const auto res = std::from_chars(line.data() + b, line.data() + e, v);
        if (res.ec != std::errc{} || res.ptr != line.data() + e)
            throw std::invalid_argument("csv: non-numeric cell '" + line.substr(b, e - b) +
                                        "' at row " + std::to_string(row_number));
        out.push_back(v);
        pos = comma + 1;
        if (comma == line.size()) break;
    }
    return out;
}

bool is_blank(const std::string& line) {
    for (char c : line)
        if (c != ' ' && c != '\t' && c != '\r') return false;
    return true;
}

}  // namespace

SequenceBatch load_csv_sequences(const std::filesystem::path& path, index_t T, index_t d) {
    if (T <= 0 || d <= 0) throw std::invalid_argument("load_csv_sequences: T and d must be positive");
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_csv_sequences: cannot open " + path.string());
    std::vector<std::vector<double>> current;
    std::vector<std::vector<std::vector<double>>> sequences;
    std::string line;
    index_t row_number = 0;
    index_t seq_start_row = 1;
    auto flush = [&] {
        if (current.empty()) return;
        if (static_cast<index_t>(current.size()) != T)
            throw std::invalid_argument("csv: sequence starting at row " + std::to_string(seq_start_row) +
                                        " has " + std::to_string(current.size()) + " rows, expected " +
                                        std::to_string(T));
        sequences.push_back(std::move(current));
        current.clear();
    };
    while (std::getline(is, line)) {
        ++row_number;
        if (is_blank(line)) {
            flush();
            seq_start_row = row_number + 1;
            continue;
        }
        std::vector<double> row = parse_csv_row(line, row_number);
        if (static_cast<index_t>(row.size()) != d)
            throw std::invalid_argument("csv: row " + std::to_string(row_number) + " has " +
                                        std::to_string(row.size()) + " columns, expected " +
                                        std::to_string(d));
        if (current.empty()) seq_start_row = row_number;
        current.push_back(std::move(row));
    }
    flush();
    if (sequences.empty()) throw std::invalid_argument("csv: no sequences in " + path.string());
    SequenceBatch out(static_cast<index_t>(sequences.size()), T, d);
    for (index_t i = 0; i < out.m; ++i)
        for (index_t t = 0; t < T; ++t)
            for (index_t k = 0; k < d; ++k)
                out.values.at(i, t, k) =
                    sequences[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
    return out;
}

void save_csv_sequences(const std::filesystem::path& path, const SequenceBatch& batch) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_csv_sequences: cannot open " + path.string());
    char buf[40];
    for (index_t i = 0; i < batch.m; ++i) {
        if (i > 0) os << '\n';
        for (index_t t = 0; t < batch.T; ++t) {
            for (index_t k = 0; k < batch.d; ++k) {
                std::snprintf(buf, sizeof buf, "%.17g", batch.values.at(i, t, k));
                os << (k ? "," : "") << buf;
            }
            os << '\n';
        }
    }
    if (!os) throw std::runtime_error("save_csv_sequences: write failure on " + path.string());
}

SequenceBatch preprocess_standardize_tanh(const SequenceBatch& batch) {
    SequenceBatch out(batch.m, batch.T, batch.d);
    const double n = static_cast<double>(batch.m * batch.T);
    for (index_t k = 0; k < batch.d; ++k) {
        double mean = 0.0;
        for (index_t i = 0; i < batch.m; ++i)
            for (index_t t = 0; t < batch.T; ++t) mean += batch.values.at(i, t, k);
        mean /= n;
        double var = 0.0;
        for (index_t i = 0; i < batch.m; ++i)
            for (index_t t = 0; t < batch.T; ++t) {
                const double c = batch.values.at(i, t, k) - mean;
                var += c * c;
            }
        const double sd = std::max(std::sqrt(var / n), 1e-12);
        for (index_t i = 0; i < batch.m; ++i)
            for (index_t t = 0; t < batch.T; ++t)
                out.values.at(i, t, k) = std::tanh((batch.values.at(i, t, k) - mean) / (3.0 * sd));
    }
    return out;
}

}  // namespace cotgan
