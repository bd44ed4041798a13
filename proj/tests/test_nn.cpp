#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "logogan/core/rng.hpp"
#include "logogan/nn/adam.hpp"
#include "logogan/nn/layers.hpp"

using namespace logogan;

namespace {

Tensor random_tensor(std::vector<int> shape, std::uint64_t seed, double scale = 1.0) {
    Tensor t(std::move(shape));
    Rng rng(seed);
    for (auto& v : t.data) v = rng.normal() * scale;
    return t;
}

// central finite difference of a scalar function w.r.t. one slot
double fd(const std::function<double()>& f, double& slot, double h = 1e-6) {
    const double saved = slot;
    slot = saved + h;
    const double fp = f();
    slot = saved - h;
    const double fm = f();
    slot = saved;
    return (fp - fm) / (2.0 * h);
}

void check_grad(double analytic, double numeric, double tol = 1e-6) {
    const double scale = std::max({1.0, std::abs(analytic), std::abs(numeric)});
    REQUIRE(std::abs(analytic - numeric) / scale < tol);
}

} // namespace

TEST_CASE("dense: forward shape and gradcheck") {
    Dense layer;
    layer.init("t.dense", 3, 2, 42, true);
    Tensor x = random_tensor({4, 3}, 1);
    Tensor wout = random_tensor({4, 2}, 2);

    auto loss = [&]() {
        Tensor y = layer.forward(x);
        double s = 0;
        for (std::size_t i = 0; i < y.size(); ++i) s += y.data[i] * wout.data[i];
        return s;
    };
    loss();
    layer.weight.zero_grad();
    layer.bias.zero_grad();
    Tensor dx = layer.backward(wout);

    for (std::size_t i = 0; i < layer.weight.size(); ++i)
        check_grad(layer.weight.grad[i], fd(loss, layer.weight.value[i]));
    for (std::size_t i = 0; i < layer.bias.size(); ++i)
        check_grad(layer.bias.grad[i], fd(loss, layer.bias.value[i]));
    for (std::size_t i = 0; i < x.size(); ++i) check_grad(dx.data[i], fd(loss, x.data[i]));
}

TEST_CASE("conv2d: gradcheck for 3x3 and 1x1 kernels") {
    for (int k : {3, 1}) {
        Conv2D layer;
        layer.init("t.conv" + std::to_string(k), 2, 3, k, 7, true);
        Tensor x = random_tensor({2, 2, 4, 4}, 11);
        Tensor wout = random_tensor({2, 3, 4, 4}, 12);
        auto loss = [&]() {
            Tensor y = layer.forward(x);
            double s = 0;
            for (std::size_t i = 0; i < y.size(); ++i) s += y.data[i] * wout.data[i];
            return s;
        };
        loss();
        layer.weight.zero_grad();
        layer.bias.zero_grad();
        Tensor dx = layer.backward(wout);
        for (std::size_t i = 0; i < layer.weight.size(); ++i)
            check_grad(layer.weight.grad[i], fd(loss, layer.weight.value[i]), 1e-5);
        for (std::size_t i = 0; i < layer.bias.size(); ++i)
            check_grad(layer.bias.grad[i], fd(loss, layer.bias.value[i]), 1e-5);
        for (std::size_t i = 0; i < x.size(); ++i)
            check_grad(dx.data[i], fd(loss, x.data[i]), 1e-5);
    }
}

TEST_CASE("activations and pixel norm: gradcheck") {
    Tensor x = random_tensor({3, 5}, 21);
    Tensor wout = random_tensor({3, 5}, 22);

    SECTION("leaky relu") {
        LeakyReLU act;
        auto loss = [&]() {
            Tensor y = act.forward(x);
            double s = 0;
            for (std::size_t i = 0; i < y.size(); ++i) s += y.data[i] * wout.data[i];
            return s;
        };
        loss();
        Tensor dx = act.backward(wout);
        for (std::size_t i = 0; i < x.size(); ++i) check_grad(dx.data[i], fd(loss, x.data[i]));
    }
    SECTION("tanh") {
        Tanh act;
        auto loss = [&]() {
            Tensor y = act.forward(x);
            double s = 0;
            for (std::size_t i = 0; i < y.size(); ++i) s += y.data[i] * wout.data[i];
            return s;
        };
        loss();
        Tensor dx = act.backward(wout);
        for (std::size_t i = 0; i < x.size(); ++i) check_grad(dx.data[i], fd(loss, x.data[i]));
    }
    SECTION("pixel norm normalizes rows and gradchecks") {
        PixelNorm norm;
        Tensor y = norm.forward(x);
        for (int i = 0; i < 3; ++i) {
            double ms = 0;
            for (int j = 0; j < 5; ++j) ms += y.at2(i, j) * y.at2(i, j);
            REQUIRE(ms / 5 == Catch::Approx(1.0).margin(1e-6));
        }
        auto loss = [&]() {
            Tensor t = norm.forward(x);
            double s = 0;
            for (std::size_t i = 0; i < t.size(); ++i) s += t.data[i] * wout.data[i];
            return s;
        };
        loss();
        Tensor dx = norm.backward(wout);
        for (std::size_t i = 0; i < x.size(); ++i) check_grad(dx.data[i], fd(loss, x.data[i]));
    }
}

TEST_CASE("upsample/avgpool: adjoint pairs") {
    Tensor x = random_tensor({2, 3, 4, 4}, 31);
    Tensor y = random_tensor({2, 3, 8, 8}, 32);
    // <up(x), y> == <x, up^T(y)>
    Tensor ux = upsample2x(x);
    double lhs = 0, rhs = 0;
    for (std::size_t i = 0; i < ux.size(); ++i) lhs += ux.data[i] * y.data[i];
    Tensor uty = upsample2x_backward(y);
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x.data[i] * uty.data[i];
    REQUIRE(lhs == Catch::Approx(rhs).margin(1e-9));

    Tensor py = avgpool2x(y);
    lhs = rhs = 0;
    for (std::size_t i = 0; i < py.size(); ++i) lhs += py.data[i] * x.data[i];
    Tensor pty = avgpool2x_backward(x);
    for (std::size_t i = 0; i < y.size(); ++i) rhs += y.data[i] * pty.data[i];
    REQUIRE(lhs == Catch::Approx(rhs).margin(1e-9));

    SECTION("avgpool of upsample is identity") {
        Tensor round = avgpool2x(upsample2x(x));
        for (std::size_t i = 0; i < x.size(); ++i)
            REQUIRE(round.data[i] == Catch::Approx(x.data[i]).margin(1e-12));
    }
}

TEST_CASE("progressive_blend: endpoints exact, affine in alpha") {
    Tensor low = random_tensor({2, 3, 4, 4}, 41);
    Tensor high = random_tensor({2, 3, 4, 4}, 42);
    REQUIRE(progressive_blend(low, high, 0.0).data == low.data);
    REQUIRE(progressive_blend(low, high, 1.0).data == high.data);
    Tensor zero(low.shape), one(low.shape);
    for (auto& v : one.data) v = 1.0;
    Tensor mid = progressive_blend(zero, one, 0.5);
    for (double v : mid.data) REQUIRE(v == 0.5);
    // blend(a) + blend(1-a) == low + high
    Tensor a = progressive_blend(low, high, 0.3);
    Tensor b = progressive_blend(low, high, 0.7);
    for (std::size_t i = 0; i < a.size(); ++i)
        REQUIRE(a.data[i] + b.data[i] == Catch::Approx(low.data[i] + high.data[i]).margin(1e-12));
    REQUIRE_THROWS(progressive_blend(low, high, 1.5));
    REQUIRE_THROWS(progressive_blend(low, high, -0.1));
}

TEST_CASE("apply_noise: zero scale, zero noise, scalar example") {
    Tensor x = random_tensor({2, 3, 4, 4}, 51);
    Tensor noise = random_tensor({2, 1, 4, 4}, 52);
    SECTION("zero scale leaves x") {
        REQUIRE(apply_noise(x, noise, {0, 0, 0}).data == x.data);
    }
    SECTION("zero noise leaves x") {
        Tensor zn({2, 1, 4, 4});
        REQUIRE(apply_noise(x, zn, {1, 2, 3}).data == x.data);
    }
    SECTION("scale=2, x=3, noise=0.5 gives 4") {
        Tensor x1({1, 1, 1, 1}), n1({1, 1, 1, 1});
        x1.data[0] = 3.0;
        n1.data[0] = 0.5;
        REQUIRE(apply_noise(x1, n1, {2.0}).data[0] == 4.0);
    }
    SECTION("shape mismatch rejected") {
        Tensor bad({2, 1, 2, 2});
        REQUIRE_THROWS(apply_noise(x, bad, {1, 1, 1}));
    }
}

TEST_CASE("adain: spec examples") {
    SECTION("zero-mean unit-std input with identity style is unchanged") {
        // build a map with exactly zero mean, unit (biased) std per channel
        Tensor x({1, 1, 1, 4});
        x.data = {-1.0, 1.0, -1.0, 1.0};
        Tensor s({1, 1}), b({1, 1});
        s.data[0] = 1.0;
        b.data[0] = 0.0;
        Tensor y = adain_forward(x, s, b, nullptr);
        for (std::size_t i = 0; i < x.size(); ++i)
            REQUIRE(y.data[i] == Catch::Approx(x.data[i]).margin(1e-4));
    }
    SECTION("self-style inverse: sigma(y)=sigma(x), mu(y)=mu(x)") {
        Tensor x = random_tensor({2, 3, 4, 4}, 61);
        Tensor s({2, 3}), b({2, 3});
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 3; ++j) {
                double mean = 0, var = 0;
                for (int p = 0; p < 16; ++p) mean += x.data[(i * 3 + j) * 16 + p];
                mean /= 16;
                for (int p = 0; p < 16; ++p) {
                    const double d = x.data[(i * 3 + j) * 16 + p] - mean;
                    var += d * d;
                }
                var /= 16;
                s.at2(i, j) = std::sqrt(var);
                b.at2(i, j) = mean;
            }
        Tensor y = adain_forward(x, s, b, nullptr);
        for (std::size_t i = 0; i < x.size(); ++i)
            REQUIRE(y.data[i] == Catch::Approx(x.data[i]).margin(1e-6));
    }
    SECTION("hand-computed 2x2 example") {
        Tensor x({1, 1, 2, 2});
        x.data = {1, 3, 5, 7};
        Tensor s({1, 1}), b({1, 1});
        s.data[0] = 2.0;
        b.data[0] = 1.0;
        Tensor y = adain_forward(x, s, b, nullptr);
        const double sigma = std::sqrt(5.0);
        for (int i = 0; i < 4; ++i)
            REQUIRE(y.data[i] == Catch::Approx(2.0 * (x.data[i] - 4.0) / sigma + 1.0).margin(1e-6));
    }
    SECTION("post-statistics match style parameters across random pairs") {
        Rng seed_rng(77);
        for (int trial = 0; trial < 100; ++trial) {
            Tensor x = random_tensor({1, 2, 4, 4}, 1000 + trial, 2.0);
            Tensor s({1, 2}), b({1, 2});
            Rng rng(2000 + trial);
            for (auto& v : s.data) v = 0.25 + std::abs(rng.normal());
            for (auto& v : b.data) v = rng.normal();
            Tensor y = adain_forward(x, s, b, nullptr);
            for (int j = 0; j < 2; ++j) {
                double mean = 0, var = 0;
                for (int p = 0; p < 16; ++p) mean += y.data[j * 16 + p];
                mean /= 16;
                for (int p = 0; p < 16; ++p) {
                    const double d = y.data[j * 16 + p] - mean;
                    var += d * d;
                }
                var /= 16;
                REQUIRE(mean == Catch::Approx(b.at2(0, j)).margin(1e-5));
                REQUIRE(std::sqrt(var) == Catch::Approx(s.at2(0, j)).margin(1e-5));
            }
        }
    }
    SECTION("zero-variance channel stays finite") {
        Tensor x({1, 1, 2, 2});
        x.data = {3, 3, 3, 3};
        Tensor s({1, 1}), b({1, 1});
        s.data[0] = 2.0;
        b.data[0] = 0.5;
        Tensor y = adain_forward(x, s, b, nullptr);
        for (double v : y.data) REQUIRE(std::isfinite(v));
    }
}

TEST_CASE("adain: backward gradcheck") {
    Tensor x = random_tensor({2, 2, 3, 3}, 71);
    Tensor s = random_tensor({2, 2}, 72);
    Tensor b = random_tensor({2, 2}, 73);
    for (auto& v : s.data) v = 1.0 + 0.2 * v;
    Tensor wout = random_tensor({2, 2, 3, 3}, 74);

    AdaINCache cache;
    auto loss = [&]() {
        Tensor y = adain_forward(x, s, b, &cache);
        double out = 0;
        for (std::size_t i = 0; i < y.size(); ++i) out += y.data[i] * wout.data[i];
        return out;
    };
    loss();
    Tensor ds, db;
    Tensor dx = adain_backward(wout, s, cache, ds, db);
    for (std::size_t i = 0; i < x.size(); ++i) check_grad(dx.data[i], fd(loss, x.data[i]), 1e-5);
    for (std::size_t i = 0; i < s.size(); ++i) check_grad(ds.data[i], fd(loss, s.data[i]), 1e-5);
    for (std::size_t i = 0; i < b.size(); ++i) check_grad(db.data[i], fd(loss, b.data[i]), 1e-5);
}

TEST_CASE("style adain site: latent gradcheck through the affine") {
    StyleAdaIN site;
    site.init("t.site", 4, 2, 99, true);
    Tensor x = random_tensor({2, 2, 3, 3}, 81);
    Tensor w = random_tensor({2, 4}, 82);
    Tensor wout = random_tensor({2, 2, 3, 3}, 83);
    auto loss = [&]() {
        Tensor y = site.forward(x, w);
        double out = 0;
        for (std::size_t i = 0; i < y.size(); ++i) out += y.data[i] * wout.data[i];
        return out;
    };
    loss();
    Tensor dw({2, 4});
    Tensor dx = site.backward(wout, dw, false);
    for (std::size_t i = 0; i < w.size(); ++i) check_grad(dw.data[i], fd(loss, w.data[i]), 1e-5);
    for (std::size_t i = 0; i < x.size(); ++i) check_grad(dx.data[i], fd(loss, x.data[i]), 1e-5);
}

TEST_CASE("adam: minimizes a quadratic") {
    Param p;
    p.init("t.p", {2});
    p.value = {5.0, -3.0};
    AdamOptimizer opt({0.05, 0.9, 0.999, 1e-8});
    ParamList params{&p};
    for (int i = 0; i < 500; ++i) {
        p.zero_grad();
        p.grad[0] = 2.0 * (p.value[0] - 1.0);
        p.grad[1] = 2.0 * (p.value[1] + 2.0);
        opt.step(params);
    }
    REQUIRE(p.value[0] == Catch::Approx(1.0).margin(1e-2));
    REQUIRE(p.value[1] == Catch::Approx(-2.0).margin(1e-2));
}
