#include <doctest.h>

#include <cmath>
#include <cstring>

#include "error.hpp"
#include "gradcheck.hpp"
#include "numerics/adam.hpp"
#include "numerics/ops.hpp"
#include "numerics/params.hpp"

using namespace dgp;
using dgp::testing::gradcheck;
using dgp::testing::random_leaf;

namespace {

bool same_bits(std::span<const float> a, std::span<const float> b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

std::vector<float> to_vec(std::span<const float> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_CASE("randn is a pure function of the rng state") {
    Rng a(7, 0), b(7, 0);
    const Tensor x = randn(a, {4});
    const Tensor y = randn(b, {4});
    CHECK(same_bits(x.data(), y.data()));
    CHECK(a.counter() == b.counter());
    CHECK(a.counter() > 0);
    const Tensor z = randn(a, {4});
    CHECK_FALSE(same_bits(x.data(), z.data()));
}

TEST_CASE("randn moments over 1e5 draws") {
    Rng rng(11);
    const Tensor x = randn(rng, {100000});
    // Two-pass moments in double, independent of the library reductions.
    double m = 0.0;
    for (float v : x.data()) m += v;
    m /= x.numel();
    double var = 0.0;
    for (float v : x.data()) var += (v - m) * (v - m);
    var /= (x.numel() - 1);
    CHECK(m >= -0.02);
    CHECK(m <= 0.02);
    CHECK(var >= 0.97);
    CHECK(var <= 1.03);
}

TEST_CASE("randn rejects empty shapes") {
    Rng rng(1);
    CHECK_THROWS_WITH(randn(rng, {0}), doctest::Contains("empty shape"));
    CHECK_THROWS_WITH(randn(rng, {}), doctest::Contains("empty shape"));
}

TEST_CASE("rng split streams differ from parent and from each other") {
    Rng root(3);
    Rng a = root.split("a"), b = root.split("b");
    CHECK(a.next_u64() != b.next_u64());
    CHECK(Rng(3).split("a").next_u64() == Rng(3).split("a").next_u64());
    CHECK(root.split(1).next_u64() != Rng(3).next_u64());
    int lo = 0, hi = 0;
    for (int i = 0; i < 1000; ++i) {
        const int v = root.split(static_cast<std::uint64_t>(i)).uniform_int(0, 1);
        (v == 0 ? lo : hi)++;
    }
    CHECK(lo > 400);
    CHECK(hi > 400);
}

TEST_CASE("conv2d identity kernel") {
    const Tensor x({1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
    const Tensor y = conv2d(x, Tensor({1, 1, 1, 1}, {1}), Tensor({1}, {0}), 1, 0);
    CHECK(y.shape() == Shape{1, 1, 3, 3});
    CHECK(same_bits(x.data(), y.data()));
}

TEST_CASE("conv2d hand-computed diagonal kernel") {
    const Tensor x({1, 1, 2, 2}, {1, 2, 3, 4});
    const Tensor y = conv2d(x, Tensor({1, 1, 2, 2}, {1, 0, 0, 1}), Tensor({1}, {0}), 1, 0);
    CHECK(y.shape() == Shape{1, 1, 1, 1});
    CHECK(y.at(0) == 5.0f);
}

TEST_CASE("conv2d output size and shape errors") {
    Rng rng(5);
    const Tensor x = randn(rng, {2, 3, 9, 7});
    const Tensor w = randn(rng, {4, 3, 3, 3});
    const Tensor b = randn(rng, {4});
    CHECK(conv2d(x, w, b, 2, 1).shape() == Shape{2, 4, 5, 4});
    CHECK(conv2d(x, w, b, 1, 0).shape() == Shape{2, 4, 7, 5});
    CHECK_THROWS_WITH(conv2d(x, randn(rng, {4, 2, 3, 3}), b, 1, 0), doctest::Contains("C_in"));
    CHECK_THROWS_WITH(conv2d(x, w, randn(rng, {3}), 1, 0), doctest::Contains("bias"));
    CHECK_THROWS(conv2d(x, randn(rng, {4, 3, 11, 11}), b, 1, 0));
    CHECK_THROWS(conv2d(x, w, b, 0, 0));
}

TEST_CASE("conv2d is linear in its input") {
    Rng rng(8);
    const Tensor x1 = randn(rng, {2, 3, 8, 8});
    const Tensor x2 = randn(rng, {2, 3, 8, 8});
    const Tensor w = randn(rng, {5, 3, 3, 3});
    const Tensor b = Tensor::zeros({5});
    const float a = 0.7f, c = -1.3f;
    const Tensor lhs = conv2d(add(scale(x1, a), scale(x2, c)), w, b, 1, 1);
    const Tensor rhs = add(scale(conv2d(x1, w, b, 1, 1), a), scale(conv2d(x2, w, b, 1, 1), c));
    double worst = 0.0;
    for (std::size_t i = 0; i < lhs.numel(); ++i) worst = std::max(worst, double(std::fabs(lhs.at(i) - rhs.at(i))));
    CHECK(worst <= 1e-4);
}

TEST_CASE("conv2d results do not depend on batch composition") {
    Rng rng(2);
    const Tensor x = randn(rng, {3, 2, 6, 6});
    const Tensor w = randn(rng, {4, 2, 3, 3});
    const Tensor b = randn(rng, {4});
    const Tensor full = conv2d(x, w, b, 1, 1);
    const Tensor one = conv2d(Tensor({1, 2, 6, 6}, to_vec(x.data().subspan(2 * 2 * 36, 2 * 36))), w, b, 1, 1);
    CHECK(same_bits(one.data(), full.data().subspan(2 * 4 * 36, 4 * 36)));
}

TEST_CASE("conv2d forward and backward bits do not depend on buffer addresses") {
    std::vector<float> ref_y, ref_gx, ref_gw, ref_gb;
    std::vector<std::vector<float>> junk;
    for (int trial = 0; trial < 12; ++trial) {
        // Shift the heap so every buffer lands at a different alignment.
        junk.emplace_back(static_cast<std::size_t>(trial * 7 + 1), 0.0f);
        Rng rng(77);
        Tensor x(Shape{2, 5, 9, 9}, to_vec(randn(rng, {2, 5, 9, 9}).data()), true);
        Tensor w(Shape{7, 5, 3, 3}, to_vec(randn(rng, {7, 5, 3, 3}).data()), true);
        Tensor b(Shape{7}, to_vec(randn(rng, {7}).data()), true);
        const Tensor y = conv2d(x, w, b, 2, 1);
        backward(sum_squares(y));
        if (trial == 0) {
            ref_y = to_vec(y.data());
            ref_gx = to_vec(x.grad_data());
            ref_gw = to_vec(w.grad_data());
            ref_gb = to_vec(b.grad_data());
            continue;
        }
        CHECK(same_bits(y.data(), ref_y));
        CHECK(same_bits(x.grad_data(), ref_gx));
        CHECK(same_bits(w.grad_data(), ref_gw));
        CHECK(same_bits(b.grad_data(), ref_gb));
    }
}

TEST_CASE("elementwise definitions") {
    const Tensor a({3}, {-1.0f, 0.0f, 2.0f});
    const Tensor b({3}, {4.0f, 5.0f, -6.0f});
    CHECK(to_vec(add(a, b).data()) == std::vector<float>{3, 5, -4});
    CHECK(to_vec(sub(a, b).data()) == std::vector<float>{-5, -5, 8});
    CHECK(to_vec(mul(a, b).data()) == std::vector<float>{-4, 0, -12});
    CHECK(to_vec(scale(a, 2).data()) == std::vector<float>{-2, 0, 4});
    CHECK(to_vec(abs(a).data()) == std::vector<float>{1, 0, 2});
    CHECK(leaky_relu(Tensor({1}, {-1.0f}), 0.2f).item() == doctest::Approx(-0.2f));
    CHECK(leaky_relu(Tensor({1}, {3.0f}), 0.2f).item() == 3.0f);
    CHECK(sigmoid(Tensor({1}, {0.0f})).item() == 0.5f);
    CHECK(softplus(Tensor({1}, {0.0f})).item() == doctest::Approx(std::log(2.0)));
    CHECK(softplus(Tensor({1}, {100.0f})).item() == doctest::Approx(100.0f));
    CHECK(softplus(Tensor({1}, {-100.0f})).item() >= 0.0f);
    CHECK(mean(a).item() == doctest::Approx(1.0f / 3.0f));
    CHECK(sum_squares(a).item() == 5.0f);
    CHECK_THROWS(add(a, Tensor::zeros({4})));
    CHECK_THROWS(mul(a, Tensor::zeros({1, 3})));
}

TEST_CASE("tanh stays in [-1, 1] for arbitrary finite input") {
    const Tensor x({6}, {-1e30f, -50.0f, -1e-3f, 0.0f, 50.0f, 3e38f});
    const Tensor y = tanh(x);
    for (float v : y.data()) {
        CHECK(v >= -1.0f);
        CHECK(v <= 1.0f);
    }
}

TEST_CASE("concat_channels shape, spatial check and slice recovery") {
    Rng rng(4);
    const Tensor a = randn(rng, {3, 8, 8});
    const Tensor b = randn(rng, {3, 8, 8});
    const Tensor c = concat_channels(a, b);
    CHECK(c.shape() == Shape{6, 8, 8});
    CHECK(same_bits(slice_channels(c, 0, 3).data(), a.data()));
    CHECK(same_bits(slice_channels(c, 3, 3).data(), b.data()));
    const Tensor a4 = randn(rng, {2, 1, 4, 4});
    const Tensor b4 = randn(rng, {2, 3, 4, 4});
    const Tensor c4 = concat_channels(a4, b4);
    CHECK(c4.shape() == Shape{2, 4, 4, 4});
    CHECK(same_bits(slice_channels(c4, 0, 1).data(), a4.data()));
    CHECK(same_bits(slice_channels(c4, 1, 3).data(), b4.data()));
    CHECK_THROWS(concat_channels(a, randn(rng, {3, 8, 7})));
    CHECK_THROWS(slice_channels(c, 5, 2));
}

TEST_CASE("upsample, broadcast and spatial mean shapes") {
    const Tensor x({1, 1, 2, 2}, {1, 2, 3, 4});
    const Tensor u = upsample_nearest(x, 2);
    CHECK(u.shape() == Shape{1, 1, 4, 4});
    CHECK(to_vec(u.data()) == std::vector<float>{1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4});
    const Tensor bc = broadcast_channels(x, 3);
    CHECK(bc.shape() == Shape{1, 3, 2, 2});
    CHECK(same_bits(slice_channels(bc, 2, 1).data(), x.data()));
    CHECK(spatial_mean(x).item() == 2.5f);
}

TEST_CASE("tensors reject non-finite values and size mismatches") {
    CHECK_THROWS(Tensor({2}, {1.0f, NAN}));
    CHECK_THROWS(Tensor({3}, {1.0f, 2.0f}));
    CHECK_THROWS(Tensor({2, 0}, {}));
    try {
        (void)scale(Tensor({1}, {3e38f}), 10.0f);
        FAIL("expected overflow to be reported");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Numeric);
    }
}

TEST_CASE("backward of sum_squares") {
    Tensor p({2}, {1.0f, 2.0f}, true);
    backward(sum_squares(p));
    CHECK(to_vec(p.grad().data()) == std::vector<float>{2.0f, 4.0f});
}

TEST_CASE("backward accumulates into leaves until zeroed") {
    Tensor p({2}, {1.0f, 2.0f}, true);
    backward(sum_squares(p));
    backward(sum_squares(p));
    CHECK(to_vec(p.grad().data()) == std::vector<float>{4.0f, 8.0f});
    p.zero_grad();
    CHECK(to_vec(p.grad().data()) == std::vector<float>{0.0f, 0.0f});
}

TEST_CASE("unreachable parameter keeps a zero gradient") {
    Tensor p({2}, {1.0f, 2.0f}, true);
    Tensor q({3}, {1.0f, 2.0f, 3.0f}, true);
    backward(sum_squares(p));
    CHECK(to_vec(q.grad().data()) == std::vector<float>{0.0f, 0.0f, 0.0f});
}

TEST_CASE("backward requires a scalar loss") {
    Tensor p({2}, {1.0f, 2.0f}, true);
    CHECK_THROWS(backward(scale(p, 2.0f)));
}

TEST_CASE("no-grad scope builds no graph") {
    Tensor p({2}, {1.0f, 2.0f}, true);
    NoGradGuard guard;
    const Tensor y = sum_squares(p);
    CHECK_FALSE(y.requires_grad());
}

TEST_CASE("gradcheck: small random 2-layer conv net") {
    Rng rng(21);
    std::vector<Tensor> leaves = {random_leaf(rng, {2, 2, 5, 5}), random_leaf(rng, {3, 2, 3, 3}),
                                  random_leaf(rng, {3}), random_leaf(rng, {2, 3, 3, 3}), random_leaf(rng, {2})};
    const auto r = gradcheck(leaves, [](const std::vector<Tensor>& l) {
        const Tensor h = leaky_relu(conv2d(l[0], l[1], l[2], 1, 1), 0.2f);
        return conv2d(tanh(h), l[3], l[4], 2, 1);
    });
    CHECK(r.checked == 100 + 54 + 3 + 54 + 2);
    CHECK(r.max_rel_error <= 1e-2);
}

TEST_CASE("adam first step closed form") {
    ParamSet ps;
    Tensor& p = ps.add("p", Tensor({1}, {0.0f}, true));
    backward(scale(mean(mul(p, Tensor({1}, {1.0f}))), 0.5f));
    REQUIRE(p.grad().item() == 0.5f);
    AdamState st;
    AdamConfig cfg;
    cfg.lr = 1e-3f;
    adam_step(ps, st, cfg);
    const double g = 0.5;
    const double expected = cfg.lr * g / (std::sqrt(g * g) + cfg.epsilon);
    CHECK(st.t == 1);
    CHECK(-p.item() == doctest::Approx(expected).epsilon(1e-6));
    CHECK(std::fabs(p.item()) == doctest::Approx(1e-3).epsilon(1e-4));
}

TEST_CASE("adam with zero gradient leaves parameters unchanged") {
    ParamSet ps;
    ps.add("a", Tensor({2}, {0.5f, -0.25f}, true));
    ps.add("b", Tensor({1}, {3.0f}, true));
    const auto before = ps.snapshot();
    AdamState st;
    adam_step(ps, st, {});
    adam_step(ps, st, {});
    CHECK(st.t == 2);
    CHECK(ps.snapshot() == before);
    REQUIRE(st.m.size() == 2);
    CHECK(st.m[0].size() == 2);
    CHECK(st.v[1].size() == 1);
}

TEST_CASE("training a conv layer is deterministic") {
    auto run = [] {
        Rng rng(13);
        ParamSet ps;
        Conv2d conv(ps, "c", 2, 3, 3, 1, 1, rng);
        Adam opt({.lr = 1e-2f});
        for (int i = 0; i < 5; ++i) {
            ps.zero_grad();
            const Tensor x = randn(rng, {2, 2, 6, 6});
            backward(sum_squares(conv(x)));
            opt.step(ps);
        }
        return ps.snapshot();
    };
    const auto a = run();
    const auto b = run();
    CHECK(same_bits(a, b));
}

TEST_CASE("param set lookups") {
    ParamSet ps;
    ps.add("x", Tensor::zeros({1}, true));
    CHECK(ps.contains("x"));
    CHECK_THROWS_WITH(ps.get("y"), doctest::Contains("missing tensor 'y'"));
    CHECK_THROWS(ps.add("x", Tensor::zeros({1}, true)));
}

TEST_CASE("gradcheck: every differentiable op") {
    for (std::uint64_t trial = 0; trial < 3; ++trial) {
        Rng rng = Rng(1234).split(trial);
        for (auto& gc : dgp::testing::gradcheck_cases(rng)) {
            CAPTURE(gc.name);
            CAPTURE(trial);
            const auto r = gradcheck(gc.leaves, gc.output);
            CHECK(r.checked > 0);
            CHECK(r.max_rel_error <= 1e-2);
        }
    }
}
