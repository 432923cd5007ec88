#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "cotgan/checkpoint.hpp"
#include "cotgan/rng.hpp"
#include "cotgan/sequence.hpp"
#include "cotgan/tape.hpp"
#include "gradcheck.hpp"

using namespace cotgan;
using cotgan::testing::gradcheck;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

Tensor rand_tensor(Rng& rng, Shape s) { return rng.normal_tensor(s); }
}  // namespace

TEST_CASE("tensor construction and validation") {
    Tensor t = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(t.size() == 6);
    CHECK(t.at(1, 2) == 6.0);
    CHECK_THROWS_AS(Tensor(Shape{2, 0}), std::invalid_argument);
    CHECK_THROWS_AS(Tensor(Shape{2, 2}, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("broadcast shapes") {
    CHECK(broadcast_shapes({3, 1}, {2}, "t") == Shape{3, 2});
    CHECK(broadcast_shapes({4, 1, 5}, {1, 3, 1}, "t") == Shape{4, 3, 5});
    CHECK_THROWS_WITH_AS(broadcast_shapes({3}, {4}, "myop"),
                         doctest::Contains("myop"), std::invalid_argument);
}

TEST_CASE("broadcast binary against direct loop") {
    Tensor a = Tensor::from({2, 1}, {1, 10});
    Tensor b = Tensor::from({3}, {1, 2, 3});
    Tensor c = broadcast_binary(a, b, "add", [](double x, double y) { return x + y; });
    CHECK(c.shape == Shape{2, 3});
    CHECK(c.at(0, 2) == 4.0);
    CHECK(c.at(1, 0) == 11.0);
}

TEST_CASE("reduce_to_shape sums broadcast axes") {
    Tensor g = Tensor::full({2, 3}, 1.0);
    Tensor r = reduce_to_shape(g, {2, 1});
    CHECK(r.shape == Shape{2, 1});
    CHECK(r[0] == 3.0);
    Tensor r2 = reduce_to_shape(g, {3});
    CHECK(r2[1] == 2.0);
}

TEST_CASE("matmul forward") {
    Tensor a = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor b = Tensor::from({3, 2}, {7, 8, 9, 10, 11, 12});
    Tensor c = matmul_forward(a, b);
    CHECK(c.at(0, 0) == 58.0);
    CHECK(c.at(1, 1) == 154.0);
    CHECK_THROWS_AS(matmul_forward(a, a), std::invalid_argument);
}

TEST_CASE("gradcheck elementwise and broadcasting") {
    Rng rng(11);
    auto build = [](Tape&, const std::vector<Var>& v) {
        Var s = mul(add(v[0], v[1]), sub(v[0], scale(v[1], 0.5)));
        return sum_all(mul(s, s));
    };
    auto res = gradcheck(build, {rand_tensor(rng, {3, 1}), rand_tensor(rng, {4})});
    CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("gradcheck unary chain") {
    Rng rng(12);
    Tensor x = rng.uniform_tensor({5}, 0.5, 2.0);
    auto build = [](Tape&, const std::vector<Var>& v) {
        Var a = tanh(v[0]);
        Var b = sigmoid(v[0]);
        Var c = cotgan::exp(scale(v[0], -0.3));
        Var d = cotgan::log(v[0]);
        Var e = cotgan::sqrt(v[0]);
        return sum_all(add(add(mul(a, b), c), mul(d, e)));
    };
    auto res = gradcheck(build, {x});
    CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("gradcheck relu abs maximum away from kinks") {
    Rng rng(13);
    Tensor x = rand_tensor(rng, {8});
    for (double& v : x.data)
        if (std::abs(v) < 0.2) v += v < 0 ? -0.5 : 0.5;
    Tensor y = rand_tensor(rng, {8});
    for (index_t i = 0; i < 8; ++i)
        if (std::abs(x[i] - y[i]) < 0.2) y[i] += 0.5;
    auto build = [](Tape&, const std::vector<Var>& v) {
        return sum_all(add(add(relu(v[0]), cotgan::abs(v[0])), maximum(v[0], v[1])));
    };
    auto res = gradcheck(build, {x, y});
    CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("tie conventions at kinks") {
    Tape t;
    Var x = t.leaf(Tensor::from({2}, {0.0, 0.0}));
    Var y = t.leaf(Tensor::from({2}, {0.0, -1.0}));
    SUBCASE("relu derivative at zero is one") {
        t.backward(sum_all(relu(x)));
        CHECK(t.grad(x)[0] == 1.0);
    }
    SUBCASE("abs derivative at zero is plus one") {
        t.backward(sum_all(cotgan::abs(x)));
        CHECK(t.grad(x)[0] == 1.0);
    }
    SUBCASE("maximum tie routes to first argument") {
        t.backward(sum_all(maximum(x, y)));
        CHECK(t.grad(x)[0] == 1.0);
        CHECK(t.grad(y)[0] == 0.0);
        CHECK(t.grad(x)[1] == 1.0);  // 0 > -1
    }
}

TEST_CASE("gradcheck matmul and reductions") {
    Rng rng(14);
    auto build = [](Tape&, const std::vector<Var>& v) {
        Var p = matmul(v[0], v[1]);
        Var q = mean(p, 0);
        Var r = sum(p, 1);
        return add(mean_all(q), sum_all(cotgan::tanh(r)));
    };
    auto res = gradcheck(build, {rand_tensor(rng, {3, 4}), rand_tensor(rng, {4, 2})});
    CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("gradcheck logsumexp") {
    Rng rng(15);
    auto build = [](Tape&, const std::vector<Var>& v) {
        return sum_all(logsumexp(v[0], 1));
    };
    auto res = gradcheck(build, {rand_tensor(rng, {3, 5})});
    CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("logsumexp handles minus infinity") {
    Tape t;
    Var x = t.leaf(Tensor::from({1, 2}, {0.0, -kInf}));
    Var y = logsumexp(x, 1);
    CHECK(t.value(y)[0] == 0.0);
    t.backward(sum_all(y));
    CHECK(t.grad(x)[0] == 1.0);
    CHECK(t.grad(x)[1] == 0.0);

    Tape t2;
    Var z = t2.leaf(Tensor::from({1, 2}, {-kInf, -kInf}));
    Var w = logsumexp(z, 1);
    CHECK(t2.value(w)[0] == -kInf);
}

TEST_CASE("gradcheck shape ops") {
    Rng rng(16);
    auto build = [](Tape&, const std::vector<Var>& v) {
        Var r = reshape(v[0], {6});
        Var s = slice(r, 0, 1, 3);
        Var c = concat({s, v[1]}, 0);
        return sum_all(mul(c, c));
    };
    auto res = gradcheck(build, {rand_tensor(rng, {2, 3}), rand_tensor(rng, {2})});
    CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("gradcheck pairwise_sqdist against explicit loops") {
    Rng rng(17);
    Tensor x = rand_tensor(rng, {3, 4});
    Tensor y = rand_tensor(rng, {2, 4});
    Tape t;
    Var vx = t.leaf(x), vy = t.leaf(y);
    Var c = pairwise_sqdist(vx, vy);
    for (index_t i = 0; i < 3; ++i)
        for (index_t j = 0; j < 2; ++j) {
            double s = 0;
            for (index_t f = 0; f < 4; ++f) {
                const double d = x.at(i, f) - y.at(j, f);
                s += d * d;
            }
            CHECK(t.value(c).at(i, j) == doctest::Approx(s).epsilon(1e-14));
        }
    auto build = [](Tape&, const std::vector<Var>& v) {
        return sum_all(cotgan::tanh(scale(pairwise_sqdist(v[0], v[1]), 0.1)));
    };
    auto res = gradcheck(build, {x, y});
    CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("lse_sub_scaled matches composed graph in value and gradient") {
    Rng rng(18);
    Tensor C = rng.uniform_tensor({3, 4}, 0.0, 2.0);
    Tensor v = rand_tensor(rng, {4});
    const double eps = 0.7;

    Tape t1;
    Var c1 = t1.leaf(C), v1 = t1.leaf(v);
    Var fused = lse_sub_scaled(c1, v1, eps, 1);
    t1.backward(sum_all(cotgan::tanh(fused)));

    Tape t2;
    Var c2 = t2.leaf(C), v2 = t2.leaf(v);
    Var vb = reshape(v2, {1, 4});
    Var z = scale(sub(vb, c2), 1.0 / eps);
    Var composed = logsumexp(z, 1);
    t2.backward(sum_all(cotgan::tanh(composed)));

    for (index_t i = 0; i < 3; ++i)
        CHECK(t1.value(fused)[i] == doctest::Approx(t2.value(composed)[i]).epsilon(1e-13));
    for (index_t i = 0; i < C.size(); ++i)
        CHECK(t1.grad(c1)[i] == doctest::Approx(t2.grad(c2)[i]).epsilon(1e-11));
    for (index_t i = 0; i < v.size(); ++i)
        CHECK(t1.grad(v1)[i] == doctest::Approx(t2.grad(v2)[i]).epsilon(1e-11));
}

TEST_CASE("gradcheck lse_sub_scaled both axes") {
    Rng rng(19);
    Tensor C = rng.uniform_tensor({4, 3}, 0.0, 3.0);
    auto build0 = [](Tape&, const std::vector<Var>& v) {
        return sum_all(lse_sub_scaled(v[0], v[1], 0.4, 0));
    };
    auto build1 = [](Tape&, const std::vector<Var>& v) {
        return sum_all(lse_sub_scaled(v[0], v[1], 0.4, 1));
    };
    Rng r2(20);
    auto res0 = gradcheck(build0, {C, rand_tensor(r2, {4})});
    auto res1 = gradcheck(build1, {C, rand_tensor(r2, {3})});
    CHECK(res0.max_rel_err < 1e-5);
    CHECK(res1.max_rel_err < 1e-5);
}

TEST_CASE("causal_conv1d is causal and gradchecks") {
    Rng rng(21);
    Tensor X = rand_tensor(rng, {2, 5, 3});
    Tensor W = rand_tensor(rng, {2, 3, 3});
    Tensor b = rand_tensor(rng, {2});

    Tape t;
    Var y = causal_conv1d(t.leaf(X), t.leaf(W), t.leaf(b));
    Tensor y0 = t.value(y);

    // Perturbing the future must leave earlier outputs untouched.
    Tensor Xf = X;
    Xf.at(0, 4, 1) += 10.0;
    Tape t2;
    Tensor y1 = t2.value(causal_conv1d(t2.leaf(Xf), t2.leaf(W), t2.leaf(b)));
    for (index_t tt = 0; tt < 4; ++tt)
        for (index_t o = 0; o < 2; ++o) CHECK(y0.at(0, tt, o) == y1.at(0, tt, o));
    CHECK(y0.at(0, 4, 0) != y1.at(0, 4, 0));

    auto build = [](Tape&, const std::vector<Var>& v) {
        return sum_all(cotgan::tanh(causal_conv1d(v[0], v[1], v[2])));
    };
    auto res = gradcheck(build, {X, W, b});
    CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("div forward and gradcheck with broadcasting") {
    Rng rng(31);
    Tape t;
    const Var a = t.leaf(Tensor::from({2, 2}, {1.0, -3.0, 0.5, 8.0}));
    const Var b = t.leaf(Tensor::from({2}, {2.0, 4.0}));
    const Tensor& q = t.value(div(a, b));
    CHECK(q.data == std::vector<double>{0.5, -0.75, 0.25, 2.0});

    auto build = [](Tape&, const std::vector<Var>& v) {
        Var denom = add_scalar(mul(v[1], v[1]), 1.5);
        return sum_all(mul(div(v[0], denom), v[0]));
    };
    auto res = gradcheck(build, {rand_tensor(rng, {3, 4}), rand_tensor(rng, {4})});
    CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("transpose forward and gradcheck") {
    Rng rng(32);
    Tape t;
    const Var a = t.leaf(Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6}));
    const Tensor& at = t.value(transpose(a));
    CHECK(at.shape == Shape{3, 2});
    CHECK(at.data == std::vector<double>{1, 4, 2, 5, 3, 6});
    CHECK_THROWS_AS(transpose(t.leaf(Tensor({2, 2, 2}))), std::invalid_argument);

    auto build = [](Tape&, const std::vector<Var>& v) {
        return sum_all(mul(matmul(transpose(v[0]), v[1]), transpose(v[2])));
    };
    auto res = gradcheck(build, {rand_tensor(rng, {4, 3}), rand_tensor(rng, {4, 2}),
                                 rand_tensor(rng, {2, 3})});
    CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("unused leaf reports exact zero gradient") {
    Tape t;
    Var used = t.leaf(Tensor::from({2}, {1, 2}));
    Var unused = t.leaf(Tensor::from({3}, {1, 2, 3}));
    t.backward(sum_all(used));
    Tensor g = t.grad(unused);
    CHECK(g.shape == Shape{3});
    for (double v : g.data) CHECK(v == 0.0);
}

TEST_CASE("tape error contracts") {
    Tape t;
    Var x = t.leaf(Tensor::from({2}, {1, 2}));
    CHECK_THROWS_AS(t.backward(x), std::invalid_argument);
    Var neg = t.leaf(Tensor::from({1}, {-1.0}));
    CHECK_THROWS_AS(cotgan::log(neg), std::invalid_argument);
    CHECK_THROWS_AS(cotgan::sqrt(neg), std::invalid_argument);
    Tape other;
    Var y = other.leaf(Tensor::from({2}, {1, 2}));
    CHECK_THROWS_AS(add(x, y), std::invalid_argument);
}

TEST_CASE("replaying the same graph is bit identical") {
    Rng rng(22);
    Tensor x = rand_tensor(rng, {4, 4});
    auto run = [&](Tensor& grad_out) {
        Tape t;
        Var v = t.leaf(x);
        Var out = sum_all(cotgan::exp(scale(logsumexp(matmul(v, v), 1), 0.1)));
        t.backward(out);
        grad_out = t.grad(v);
        return t.scalar_value(out);
    };
    Tensor g1, g2;
    const double v1 = run(g1), v2 = run(g2);
    CHECK(v1 == v2);
    for (index_t i = 0; i < g1.size(); ++i) CHECK(g1[i] == g2[i]);
}

TEST_CASE("rng determinism and serialization") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());

    Rng c(7);
    for (int i = 0; i < 37; ++i) c.normal();  // odd count leaves a cached spare
    std::string state = c.serialize();
    Rng d = Rng::deserialize(state);
    for (int i = 0; i < 50; ++i) CHECK(c.normal() == d.normal());

    Rng e(7), f = e.derive(1), g = e.derive(2);
    CHECK(f.normal() != g.normal());
}

TEST_CASE("rng uniform range and rough moments") {
    Rng rng(99);
    double mn = 1.0, mx = 0.0, sum = 0.0, sumsq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        mn = std::min(mn, u);
        mx = std::max(mx, u);
        const double z = rng.normal();
        sum += z;
        sumsq += z * z;
    }
    CHECK(mn >= 0.0);
    CHECK(mx < 1.0);
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sumsq / n - 1.0) < 0.05);
    Rng ri(5);
    for (int i = 0; i < 1000; ++i) {
        index_t k = ri.uniform_int(7);
        CHECK(k >= 0);
        CHECK(k < 7);
    }
}

TEST_CASE("tensor file round trip is bitwise") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "cotgan_ckpt_test";
    fs::create_directories(dir);
    Tensor t = Tensor::from({2, 2}, {0.0, -0.0, 1e-320, std::numeric_limits<double>::infinity()});
    t[0] = std::nextafter(1.0, 2.0);
    write_tensor_file(dir / "a.cott", t);
    Tensor r = read_tensor_file(dir / "a.cott");
    CHECK(r.shape == t.shape);
    for (index_t i = 0; i < t.size(); ++i)
        CHECK(std::bit_cast<std::uint64_t>(r[i]) == std::bit_cast<std::uint64_t>(t[i]));

    NamedTensors named{{"weights", t}, {"bias", Tensor::from({1}, {3.5})}};
    save_tensor_map(dir / "map", named);
    NamedTensors back = load_tensor_map(dir / "map");
    REQUIRE(back.size() == 2);
    CHECK(back[0].first == "weights");
    CHECK(back[1].second[0] == 3.5);

    write_text_file(dir / "bad.cott", "NOPE");
    CHECK_THROWS_AS(read_tensor_file(dir / "bad.cott"), std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("sequence batch flattening") {
    SequenceBatch b(2, 3, 4);
    CHECK(b.values.shape == Shape{2, 3, 4});
    b.values.at(1, 2, 3) = 7.0;
    Tensor f = b.flattened();
    CHECK(f.shape == Shape{2, 12});
    CHECK(f.at(1, 11) == 7.0);
    CHECK_THROWS_AS(SequenceBatch(Tensor::from({2, 2}, {1, 2, 3, 4})), std::invalid_argument);
}
