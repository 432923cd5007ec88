#include "cotgan/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <string>

#include "cotgan/ot.hpp"
#include "cotgan/synthetic.hpp"

namespace cotgan {
namespace {

double clamp_corr(double v) { return std::clamp(v, -1.0, 1.0); }

struct BatchStats {
    Tensor autocorr;
    Tensor channel_corr;
    bool degenerate = false;
};

// Zero variance is detected exactly; a channel that is constant but whose
// pooled mean rounds inexactly produces clamped near-noise instead of the
// flag. Constant-zero data hits the flag path bit for bit.
BatchStats batch_stats(const SequenceBatch& b) {
    const index_t m = b.m;
    const index_t T = b.T;
    const index_t d = b.d;
    BatchStats s;
    s.autocorr = Tensor(Shape{T, d});
    s.channel_corr = Tensor(Shape{d, d});

    for (index_t c = 0; c < d; ++c) {
        double mean = 0.0;
        for (index_t i = 0; i < m; ++i)
            for (index_t t = 0; t < T; ++t) mean += b.values.at(i, t, c);
        mean /= static_cast<double>(m * T);
        std::vector<double> cov(static_cast<std::size_t>(T), 0.0);
        for (index_t l = 0; l < T; ++l) {
            double acc = 0.0;
            for (index_t i = 0; i < m; ++i)
                for (index_t t = 0; t + l < T; ++t)
                    acc += (b.values.at(i, t, c) - mean) * (b.values.at(i, t + l, c) - mean);
            cov[static_cast<std::size_t>(l)] = acc / static_cast<double>(m * T);
        }
        if (cov[0] <= 0.0) {
            s.degenerate = true;
            continue;
        }
        s.autocorr.at(0, c) = 1.0;
        for (index_t l = 1; l < T; ++l)
            s.autocorr.at(l, c) = clamp_corr(cov[static_cast<std::size_t>(l)] / cov[0]);
    }

    // Channel correlation across the batch at each step, then averaged over
    // steps. Live diagonal entries accumulate literal ones, so a channel with
    // positive variance at every t ends at exactly 1.
    std::vector<double> mu(static_cast<std::size_t>(d), 0.0);
    std::vector<double> var(static_cast<std::size_t>(d), 0.0);
    for (index_t t = 0; t < T; ++t) {
        for (index_t c = 0; c < d; ++c) {
            double acc = 0.0;
            for (index_t i = 0; i < m; ++i) acc += b.values.at(i, t, c);
            mu[static_cast<std::size_t>(c)] = acc / static_cast<double>(m);
            acc = 0.0;
            for (index_t i = 0; i < m; ++i) {
                const double r = b.values.at(i, t, c) - mu[static_cast<std::size_t>(c)];
                acc += r * r;
            }
            var[static_cast<std::size_t>(c)] = acc / static_cast<double>(m);
        }
        for (index_t c = 0; c < d; ++c) {
            for (index_t e = c; e < d; ++e) {
                if (var[static_cast<std::size_t>(c)] <= 0.0 ||
                    var[static_cast<std::size_t>(e)] <= 0.0) {
                    s.degenerate = true;
                    continue;
                }
                if (c == e) {
                    s.channel_corr.at(c, c) += 1.0;
                    continue;
                }
                double cov = 0.0;
                for (index_t i = 0; i < m; ++i)
                    cov += (b.values.at(i, t, c) - mu[static_cast<std::size_t>(c)]) *
                           (b.values.at(i, t, e) - mu[static_cast<std::size_t>(e)]);
                cov /= static_cast<double>(m);
                s.channel_corr.at(c, e) +=
                    clamp_corr(cov / std::sqrt(var[static_cast<std::size_t>(c)] *
                                               var[static_cast<std::size_t>(e)]));
            }
        }
    }
    for (index_t c = 0; c < d; ++c) {
        for (index_t e = c; e < d; ++e) {
            s.channel_corr.at(c, e) /= static_cast<double>(T);
            s.channel_corr.at(e, c) = s.channel_corr.at(c, e);
        }
    }
    return s;
}

void require_batch(const char* who, const SequenceBatch& b) {
    if (b.m < 1 || b.T < 1 || b.d < 1)
        throw std::invalid_argument(std::string(who) + ": empty batch");
}

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("eval: cannot open " + path.string());
    out << std::setprecision(17);
    return out;
}

}  // namespace

CorrReport correlation_stats(const SequenceBatch& batch, const SequenceBatch& reference) {
    require_batch("correlation_stats", batch);
    require_batch("correlation_stats", reference);
    if (batch.T != reference.T || batch.d != reference.d)
        throw std::invalid_argument("correlation_stats: batch and reference must share T and d");

    const BatchStats g = batch_stats(batch);
    const BatchStats r = batch_stats(reference);

    CorrReport rep;
    rep.autocorr = g.autocorr;
    rep.channel_corr = g.channel_corr;
    rep.degenerate = g.degenerate || r.degenerate;
    for (index_t l = 0; l < batch.T; ++l)
        for (index_t c = 0; c < batch.d; ++c)
            rep.autocorr_mismatch += std::abs(g.autocorr.at(l, c) - r.autocorr.at(l, c));
    for (index_t c = 0; c < batch.d; ++c)
        for (index_t e = 0; e < batch.d; ++e)
            rep.channel_mismatch += std::abs(g.channel_corr.at(c, e) - r.channel_corr.at(c, e));
    return rep;
}

DistributionReport distribution_stats(const SequenceBatch& batch) {
    require_batch("distribution_stats", batch);
    DistributionReport rep;
    rep.histogram = Tensor(Shape{50});
    rep.joint_counts = Tensor(Shape{batch.d, batch.d});
    for (index_t i = 0; i < batch.m; ++i) {
        index_t prev = 0;
        for (index_t t = 0; t < batch.T; ++t) {
            index_t loc = 0;
            double best = -1.0;
            for (index_t c = 0; c < batch.d; ++c) {
                const double v = batch.values.at(i, t, c);
                if (!(v >= 0.0 && v <= 1.0))
                    throw std::invalid_argument("distribution_stats: value outside [0, 1]");
                rep.histogram[std::min<index_t>(static_cast<index_t>(v * 50.0), 49)] += 1.0;
                if (v > best) {
                    best = v;
                    loc = c;
                }
            }
            if (t > 0) rep.joint_counts.at(prev, loc) += 1.0;
            prev = loc;
        }
    }
    return rep;
}

std::vector<BiasCurveRow> bias_curve(DivergenceKind kind, const std::vector<double>& thetas,
                                     const std::vector<index_t>& ms, index_t replicates,
                                     double eps, index_t iters, std::uint64_t mu_seed,
                                     std::uint64_t nu_seed) {
    if (thetas.empty()) throw std::invalid_argument("bias_curve: empty theta grid");
    if (ms.empty()) throw std::invalid_argument("bias_curve: empty m list");
    if (replicates < 2) throw std::invalid_argument("bias_curve: need at least 2 replicates");

    std::vector<BiasCurveRow> rows;
    rows.reserve(ms.size() * thetas.size());
    const std::size_t nt = thetas.size();
    for (index_t m : ms) {
        std::vector<double> sum(nt, 0.0);
        std::vector<double> sumsq(nt, 0.0);
        for (index_t r = 0; r < replicates; ++r) {
            Rng mu_rng(mu_seed + 13 * static_cast<std::uint64_t>(r) +
                       1000003 * static_cast<std::uint64_t>(m));
            SinusoidSpec mu_spec;
            mu_spec.theta_max = 0.8;
            const SequenceBatch x = gen_sinusoids(mu_spec, m, mu_rng).batch;
            const SequenceBatch xp = gen_sinusoids(mu_spec, m, mu_rng).batch;
            for (std::size_t ti = 0; ti < nt; ++ti) {
                Rng nu_rng(nu_seed + 17 * static_cast<std::uint64_t>(r) +
                           1000003 * static_cast<std::uint64_t>(m));
                SinusoidSpec nu_spec;
                nu_spec.theta_max = thetas[ti];
                const SequenceBatch y = gen_sinusoids(nu_spec, m, nu_rng).batch;
                const SequenceBatch yp = gen_sinusoids(nu_spec, m, nu_rng).batch;
                const double v = divergence(kind, x, y, &xp, &yp, BaseCost::SquaredL2, eps, iters);
                sum[ti] += v;
                sumsq[ti] += v * v;
            }
        }
        const double n = static_cast<double>(replicates);
        for (std::size_t ti = 0; ti < nt; ++ti) {
            BiasCurveRow row;
            row.kind = kind;
            row.m = m;
            row.theta = thetas[ti];
            row.mean = sum[ti] / n;
            const double ss = std::max(0.0, sumsq[ti] - sum[ti] * sum[ti] / n);
            row.sem = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
            row.replicates = replicates;
            rows.push_back(row);
        }
    }
    return rows;
}

void save_corr_report_csv(const std::filesystem::path& path, const CorrReport& report) {
    std::ofstream out = open_csv(path);
    out << "stat,i,j,value\n";
    for (index_t l = 0; l < report.autocorr.extent(0); ++l)
        for (index_t c = 0; c < report.autocorr.extent(1); ++c)
            out << "autocorr," << l << ',' << c << ',' << report.autocorr.at(l, c) << '\n';
    for (index_t c = 0; c < report.channel_corr.extent(0); ++c)
        for (index_t e = 0; e < report.channel_corr.extent(1); ++e)
            out << "channel_corr," << c << ',' << e << ',' << report.channel_corr.at(c, e) << '\n';
    out << "autocorr_mismatch,-1,-1," << report.autocorr_mismatch << '\n';
    out << "channel_mismatch,-1,-1," << report.channel_mismatch << '\n';
    out << "degenerate,-1,-1," << (report.degenerate ? 1 : 0) << '\n';
}

void save_histogram_csv(const std::filesystem::path& path, const DistributionReport& report) {
    std::ofstream out = open_csv(path);
    out << "bin,count\n";
    for (index_t b = 0; b < report.histogram.extent(0); ++b)
        out << b << ',' << report.histogram[b] << '\n';
}

void save_joint_counts_csv(const std::filesystem::path& path, const DistributionReport& report) {
    std::ofstream out = open_csv(path);
    out << "loc_t,loc_next,count\n";
    for (index_t a = 0; a < report.joint_counts.extent(0); ++a)
        for (index_t b = 0; b < report.joint_counts.extent(1); ++b)
            out << a << ',' << b << ',' << report.joint_counts.at(a, b) << '\n';
}

void save_bias_curve_csv(const std::filesystem::path& path, const std::vector<BiasCurveRow>& rows) {
    std::ofstream out = open_csv(path);
    out << "kind,m,theta,mean,sem,replicates\n";
    for (const BiasCurveRow& row : rows)
        out << divergence_name(row.kind) << ',' << row.m << ',' << row.theta << ',' << row.mean
            << ',' << row.sem << ',' << row.replicates << '\n';
}

}  // namespace cotgan
