#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cotgan/eval.hpp"
#include "cotgan/rng.hpp"
#include "cotgan/synthetic.hpp"

using namespace cotgan;
namespace fs = std::filesystem;

namespace {

SequenceBatch normal_batch(Rng& rng, index_t m, index_t T, index_t d) {
    SequenceBatch b(m, T, d);
    b.values = rng.normal_tensor({m, T, d});
    return b;
}

SequenceBatch uniform_batch(Rng& rng, index_t m, index_t T, index_t d) {
    SequenceBatch b(m, T, d);
    b.values = rng.uniform_tensor({m, T, d}, 0.0, 1.0);
    return b;
}

SequenceBatch reversed_rows(const SequenceBatch& b) {
    SequenceBatch out(b.m, b.T, b.d);
    for (index_t i = 0; i < b.m; ++i)
        for (index_t t = 0; t < b.T; ++t)
            for (index_t c = 0; c < b.d; ++c)
                out.values.at(b.m - 1 - i, t, c) = b.values.at(i, t, c);
    return out;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

const BiasCurveRow& row_at(const std::vector<BiasCurveRow>& rows, index_t m, double theta) {
    for (const BiasCurveRow& r : rows)
        if (r.m == m && r.theta == theta) return r;
    REQUIRE(false);
    return rows.front();
}

}  // namespace

TEST_CASE("batch against itself has zero mismatch") {
    Ar1Spec spec;
    spec.d = 3;
    spec.T = 8;
    Rng rng(101);
    const SequenceBatch b = gen_ar1(spec, 40, rng);
    const CorrReport rep = correlation_stats(b, b);
    CHECK(rep.autocorr_mismatch == 0.0);
    CHECK(rep.channel_mismatch == 0.0);
    CHECK_FALSE(rep.degenerate);
    for (index_t c = 0; c < 3; ++c) {
        CHECK(rep.autocorr.at(0, c) == 1.0);
        CHECK(rep.channel_corr.at(c, c) == 1.0);
    }
    for (index_t l = 0; l < 8; ++l)
        for (index_t c = 0; c < 3; ++c) {
            CHECK(rep.autocorr.at(l, c) >= -1.0);
            CHECK(rep.autocorr.at(l, c) <= 1.0);
        }
    for (index_t c = 0; c < 3; ++c)
        for (index_t e = 0; e < 3; ++e) {
            CHECK(rep.channel_corr.at(c, e) == rep.channel_corr.at(e, c));
            CHECK(rep.channel_corr.at(c, e) >= -1.0);
            CHECK(rep.channel_corr.at(c, e) <= 1.0);
        }
}

TEST_CASE("correlation_stats validates shapes") {
    Rng rng(5);
    const SequenceBatch a = normal_batch(rng, 4, 6, 2);
    const SequenceBatch wrong_T = normal_batch(rng, 4, 5, 2);
    const SequenceBatch wrong_d = normal_batch(rng, 4, 6, 3);
    CHECK_THROWS_AS(correlation_stats(a, wrong_T), std::invalid_argument);
    CHECK_THROWS_AS(correlation_stats(a, wrong_d), std::invalid_argument);
    CHECK_THROWS_AS(correlation_stats(SequenceBatch{}, a), std::invalid_argument);
}

TEST_CASE("ar1 channel correlation matches the stationary law") {
    // For x_t = A x_{t-1} + z_t with diagonal A and noise covariance S, the
    // stationary covariance solves V_jk = a_j a_k V_jk + S_jk, so the
    // correlation is S_jk sqrt((1-a_j^2)(1-a_k^2)) / (1 - a_j a_k).
    Ar1Spec spec;
    spec.d = 4;
    spec.T = 16;
    spec.burn_in = 60;
    Rng rng(4242);
    const SequenceBatch b = gen_ar1(spec, 600, rng);
    const CorrReport rep = correlation_stats(b, b);
    const std::vector<double> a = ar1_coeffs(4);
    for (index_t j = 0; j < 4; ++j)
        for (index_t k = 0; k < 4; ++k) {
            const double s = j == k ? 1.0 : 0.5;
            const double aj = a[static_cast<std::size_t>(j)];
            const double ak = a[static_cast<std::size_t>(k)];
            const double oracle = s * std::sqrt((1.0 - aj * aj) * (1.0 - ak * ak)) / (1.0 - aj * ak);
            CHECK(std::abs(rep.channel_corr.at(j, k) - oracle) < 0.04);
        }
    // The biased estimator shrinks lag l toward zero by (T - l) / T.
    const double a3 = a[3];
    CHECK(std::abs(rep.autocorr.at(1, 3) - 15.0 / 16.0 * a3) < 0.03);
    CHECK(std::abs(rep.autocorr.at(2, 3) - 14.0 / 16.0 * a3 * a3) < 0.05);
    CHECK(std::abs(rep.autocorr.at(3, 3) - 13.0 / 16.0 * a3 * a3 * a3) < 0.05);
}

TEST_CASE("white noise autocorrelation vanishes at positive lags") {
    Rng rng_b(777);
    Rng rng_r(778);
    const SequenceBatch b = normal_batch(rng_b, 256, 8, 3);
    const SequenceBatch ref = normal_batch(rng_r, 256, 8, 3);
    const CorrReport rep = correlation_stats(b, ref);
    const double bound = 3.0 / std::sqrt(256.0);
    for (index_t l = 1; l < 8; ++l)
        for (index_t c = 0; c < 3; ++c) CHECK(std::abs(rep.autocorr.at(l, c)) < bound);
    CHECK_FALSE(rep.degenerate);
    CHECK(rep.autocorr_mismatch > 0.0);
    CHECK(rep.channel_mismatch > 0.0);
}

TEST_CASE("zero variance channels flag and zero out") {
    Rng rng(31);
    SequenceBatch b = normal_batch(rng, 6, 5, 2);
    for (index_t i = 0; i < 6; ++i)
        for (index_t t = 0; t < 5; ++t) b.values.at(i, t, 0) = 0.5;
    const CorrReport rep = correlation_stats(b, b);
    CHECK(rep.degenerate);
    for (index_t l = 0; l < 5; ++l) CHECK(rep.autocorr.at(l, 0) == 0.0);
    CHECK(rep.autocorr.at(0, 1) == 1.0);
    CHECK(rep.channel_corr.at(0, 0) == 0.0);
    CHECK(rep.channel_corr.at(0, 1) == 0.0);
    CHECK(rep.channel_corr.at(1, 0) == 0.0);
    CHECK(rep.channel_corr.at(1, 1) == 1.0);
    CHECK(rep.autocorr_mismatch == 0.0);
    CHECK(rep.channel_mismatch == 0.0);
}

TEST_CASE("statistics ignore the batch order") {
    Rng rng(92);
    const SequenceBatch b = uniform_batch(rng, 16, 6, 3);
    const SequenceBatch perm = reversed_rows(b);
    Rng rng_ref(93);
    const SequenceBatch ref = uniform_batch(rng_ref, 16, 6, 3);

    const CorrReport r0 = correlation_stats(b, ref);
    const CorrReport r1 = correlation_stats(perm, ref);
    for (index_t l = 0; l < 6; ++l)
        for (index_t c = 0; c < 3; ++c)
            CHECK(std::abs(r0.autocorr.at(l, c) - r1.autocorr.at(l, c)) < 1e-12);
    for (index_t c = 0; c < 3; ++c)
        for (index_t e = 0; e < 3; ++e)
            CHECK(std::abs(r0.channel_corr.at(c, e) - r1.channel_corr.at(c, e)) < 1e-12);

    const DistributionReport d0 = distribution_stats(b);
    const DistributionReport d1 = distribution_stats(perm);
    for (index_t i = 0; i < 50; ++i) CHECK(d0.histogram[i] == d1.histogram[i]);
    for (index_t a = 0; a < 3; ++a)
        for (index_t c = 0; c < 3; ++c) CHECK(d0.joint_counts.at(a, c) == d1.joint_counts.at(a, c));
}

TEST_CASE("distribution_stats counts and bins") {
    SUBCASE("constant zero batch") {
        SequenceBatch b(4, 5, 3);
        const DistributionReport rep = distribution_stats(b);
        CHECK(rep.histogram[0] == 60.0);
        for (index_t i = 1; i < 50; ++i) CHECK(rep.histogram[i] == 0.0);
        CHECK(rep.joint_counts.at(0, 0) == 16.0);
        double total = 0.0;
        for (index_t a = 0; a < 3; ++a)
            for (index_t c = 0; c < 3; ++c) total += rep.joint_counts.at(a, c);
        CHECK(total == 16.0);
    }
    SUBCASE("edge values and argmax ties") {
        SequenceBatch b(1, 2, 4);
        // step 0 peaks at channel 2; step 1 ties channels 1 and 3
        const double step0[4] = {0.1, 0.2, 1.0, 0.3};
        const double step1[4] = {0.0, 0.9, 0.5, 0.9};
        for (index_t c = 0; c < 4; ++c) {
            b.values.at(0, 0, c) = step0[c];
            b.values.at(0, 1, c) = step1[c];
        }
        const DistributionReport rep = distribution_stats(b);
        CHECK(rep.histogram[49] == 1.0);  // the exact 1.0 lands in the top bin
        CHECK(rep.histogram[0] == 1.0);   // only the 0.0
        CHECK(rep.histogram[5] == 1.0);   // 0.1
        CHECK(rep.joint_counts.at(2, 1) == 1.0);
        double total = 0.0;
        for (index_t a = 0; a < 4; ++a)
            for (index_t c = 0; c < 4; ++c) total += rep.joint_counts.at(a, c);
        CHECK(total == 1.0);
    }
    SUBCASE("totals on random data") {
        Rng rng(55);
        const SequenceBatch b = uniform_batch(rng, 7, 9, 4);
        const DistributionReport rep = distribution_stats(b);
        double hist = 0.0;
        for (index_t i = 0; i < 50; ++i) hist += rep.histogram[i];
        CHECK(hist == 7.0 * 9.0 * 4.0);
        double joint = 0.0;
        for (index_t a = 0; a < 4; ++a)
            for (index_t c = 0; c < 4; ++c) joint += rep.joint_counts.at(a, c);
        CHECK(joint == 7.0 * 8.0);
    }
    SUBCASE("single step has no adjacent pairs") {
        Rng rng(56);
        const SequenceBatch b = uniform_batch(rng, 5, 1, 3);
        const DistributionReport rep = distribution_stats(b);
        for (index_t a = 0; a < 3; ++a)
            for (index_t c = 0; c < 3; ++c) CHECK(rep.joint_counts.at(a, c) == 0.0);
    }
}

TEST_CASE("distribution_stats rejects values outside the unit interval") {
    SequenceBatch b(2, 3, 2);
    b.values.at(1, 2, 0) = 1.5;
    CHECK_THROWS_AS(distribution_stats(b), std::invalid_argument);
    b.values.at(1, 2, 0) = -0.01;
    CHECK_THROWS_AS(distribution_stats(b), std::invalid_argument);
    b.values.at(1, 2, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(distribution_stats(b), std::invalid_argument);
    CHECK_THROWS_AS(distribution_stats(SequenceBatch{}), std::invalid_argument);
}

TEST_CASE("oscillation bump locations move a few cells per step") {
    OscillationSpec spec;
    Rng rng(909);
    const SequenceBatch b = gen_noisy_oscillation(spec, 64, rng);
    const DistributionReport rep = distribution_stats(b);
    double total = 0.0;
    double near = 0.0;
    for (index_t a = 0; a < rep.joint_counts.extent(0); ++a)
        for (index_t c = 0; c < rep.joint_counts.extent(1); ++c) {
            const double v = rep.joint_counts.at(a, c);
            total += v;
            if ((a > c ? a - c : c - a) <= 3) near += v;
        }
    CHECK(total == 64.0 * 47.0);
    CHECK(near / total > 0.55);
}

TEST_CASE("bias curve is reproducible and validates input") {
    const std::vector<double> thetas = {0.8, 1.0};
    const std::vector<index_t> ms = {4};
    const auto a = bias_curve(DivergenceKind::MmdBiased, thetas, ms, 5, 1.0, 3);
    const auto b = bias_curve(DivergenceKind::MmdBiased, thetas, ms, 5, 1.0, 3);
    REQUIRE(a.size() == 2);
    REQUIRE(b.size() == 2);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].kind == b[i].kind);
        CHECK(a[i].m == b[i].m);
        CHECK(a[i].theta == b[i].theta);
        CHECK(a[i].mean == b[i].mean);
        CHECK(a[i].sem == b[i].sem);
        CHECK(a[i].replicates == 5);
    }
    const auto c = bias_curve(DivergenceKind::MmdBiased, thetas, ms, 5, 1.0, 3, 123456);
    CHECK(c[0].mean != a[0].mean);

    CHECK_THROWS_AS(bias_curve(DivergenceKind::MmdBiased, {}, ms, 5, 1.0, 3),
                    std::invalid_argument);
    CHECK_THROWS_AS(bias_curve(DivergenceKind::MmdBiased, thetas, {}, 5, 1.0, 3),
                    std::invalid_argument);
    CHECK_THROWS_AS(bias_curve(DivergenceKind::MmdBiased, thetas, ms, 1, 1.0, 3),
                    std::invalid_argument);
    CHECK_THROWS_AS(bias_curve(DivergenceKind::MmdBiased, {0.2}, ms, 5, 1.0, 3),
                    std::invalid_argument);
}

TEST_CASE("mixed divergence bottoms out at the data amplitude") {
    const std::vector<double> thetas = {0.6, 0.7, 0.8, 0.9, 1.0};
    const std::vector<index_t> ms = {8, 16};
    const auto rows = bias_curve(DivergenceKind::Mixed4, thetas, ms, 40, 1.0, 50);
    REQUIRE(rows.size() == 10);
    for (index_t m : ms) {
        double best = std::numeric_limits<double>::infinity();
        double best_theta = -1.0;
        for (double theta : thetas) {
            const BiasCurveRow& r = row_at(rows, m, theta);
            if (r.mean < best) {
                best = r.mean;
                best_theta = theta;
            }
        }
        CHECK(best_theta == 0.8);
        const BiasCurveRow& at08 = row_at(rows, m, 0.8);
        CHECK(at08.mean <= best + 2.0 * at08.sem);
    }
}

TEST_CASE("two term divergence is biased at small batch size") {
    const std::vector<double> thetas = {0.4, 0.6, 0.8, 1.0, 1.2};
    const auto rows = bias_curve(DivergenceKind::Sinkhorn2Term, thetas, {8}, 40, 1.0, 50);
    double best = std::numeric_limits<double>::infinity();
    double best_theta = -1.0;
    for (const BiasCurveRow& r : rows)
        if (r.mean < best) {
            best = r.mean;
            best_theta = r.theta;
        }
    CHECK(best_theta != 0.8);
    CHECK(best_theta == 0.4);
    const BiasCurveRow& low = row_at(rows, 8, 0.4);
    const BiasCurveRow& mid = row_at(rows, 8, 0.8);
    CHECK(low.mean + 2.0 * low.sem < mid.mean);
}

TEST_CASE("sem shrinks like the square root of replicates") {
    const auto small = bias_curve(DivergenceKind::MmdBiased, {1.0}, {8}, 75, 1.0, 10);
    const auto large = bias_curve(DivergenceKind::MmdBiased, {1.0}, {8}, 300, 1.0, 10);
    const double ratio = small[0].sem / large[0].sem;
    CHECK(ratio > 1.6);
    CHECK(ratio < 2.4);
}

TEST_CASE("csv outputs round trip") {
    const fs::path dir = fresh_dir("cotgan_eval_csv");
    Rng rng(11);
    const SequenceBatch b = uniform_batch(rng, 6, 4, 3);
    Rng rng_ref(12);
    const SequenceBatch ref = uniform_batch(rng_ref, 6, 4, 3);
    const CorrReport corr = correlation_stats(b, ref);
    const DistributionReport dist = distribution_stats(b);
    const auto rows = bias_curve(DivergenceKind::MmdUnbiased, {0.8, 1.2}, {4}, 5, 1.0, 3);

    save_corr_report_csv(dir / "corr.csv", corr);
    save_histogram_csv(dir / "hist.csv", dist);
    save_joint_counts_csv(dir / "joint.csv", dist);
    save_bias_curve_csv(dir / "bias.csv", rows);

    const auto corr_lines = read_lines(dir / "corr.csv");
    REQUIRE(corr_lines.size() == 1 + 4 * 3 + 3 * 3 + 3);
    CHECK(corr_lines[0] == "stat,i,j,value");
    const auto first = split_csv(corr_lines[1]);
    REQUIRE(first.size() == 4);
    CHECK(first[0] == "autocorr");
    CHECK(first[1] == "0");
    CHECK(first[2] == "0");
    CHECK(std::stod(first[3]) == corr.autocorr.at(0, 0));
    const auto last = split_csv(corr_lines.back());
    CHECK(last[0] == "degenerate");
    CHECK(last[1] == "-1");

    const auto hist_lines = read_lines(dir / "hist.csv");
    REQUIRE(hist_lines.size() == 51);
    CHECK(hist_lines[0] == "bin,count");
    const auto bin0 = split_csv(hist_lines[1]);
    CHECK(std::stod(bin0[1]) == dist.histogram[0]);

    const auto joint_lines = read_lines(dir / "joint.csv");
    REQUIRE(joint_lines.size() == 1 + 3 * 3);
    CHECK(joint_lines[0] == "loc_t,loc_next,count");

    const auto bias_lines = read_lines(dir / "bias.csv");
    REQUIRE(bias_lines.size() == 3);
    CHECK(bias_lines[0] == "kind,m,theta,mean,sem,replicates");
    const auto brow = split_csv(bias_lines[1]);
    REQUIRE(brow.size() == 6);
    CHECK(brow[0] == divergence_name(DivergenceKind::MmdUnbiased));
    CHECK(brow[1] == "4");
    CHECK(std::stod(brow[2]) == 0.8);
    CHECK(std::stod(brow[3]) == rows[0].mean);
    CHECK(std::stod(brow[4]) == rows[0].sem);
    CHECK(brow[5] == "5");

    CHECK_THROWS_AS(save_bias_curve_csv(dir / "missing" / "bias.csv", rows), std::runtime_error);
}
