#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "diffusion/ddpm.hpp"
#include "eval/config.hpp"
#include "gan/networks.hpp"
#include "gan/train.hpp"
#include "imaging/toyshapes.hpp"
#include "numerics/ops.hpp"

using namespace dgp;

namespace {

std::vector<Image> toy_images(int n, std::uint64_t seed, int size = 16) {
    DatasetSpec spec;
    spec.count = n;
    spec.size = size;
    spec.seed = seed;
    return gen_toyshapes(spec);
}

Tensor toy_batch(int n, std::uint64_t seed, int size = 16) {
    const auto imgs = toy_images(n, seed, size);
    std::vector<const Image*> ptrs;
    for (const auto& i : imgs) ptrs.push_back(&i);
    return stack_images(ptrs);
}

}  // namespace

TEST_CASE("generator output shape and range") {
    Generator g(3, 1);
    Rng rng(2);
    const Tensor state = randn(rng, {3, 32, 32});
    const Tensor out = generator_forward(g, state, randn(rng, {3, 32, 32}));
    CHECK(out.shape() == Shape{1, 3, 32, 32});
    // Inputs far outside the data range still give tanh-bounded output.
    const Tensor wild = generator_forward(g, scale(state, 50.0f), scale(randn(rng, {3, 32, 32}), 50.0f));
    for (float v : wild.data()) {
        CHECK(v >= -1.0f);
        CHECK(v <= 1.0f);
    }
    CHECK(g.evaluations() == 2);
}

TEST_CASE("one-channel conditioning equals its explicit replication") {
    Generator g(3, 4);
    Rng rng(5);
    const Tensor state = randn(rng, {2, 3, 16, 16});
    const Tensor mask = randn(rng, {2, 1, 16, 16});
    const Tensor a = g.forward(state, mask);
    const Tensor b = g.forward(state, broadcast_channels(mask, 3));
    REQUIRE(a.numel() == b.numel());
    for (std::size_t i = 0; i < a.numel(); ++i) CHECK(a.at(i) == b.at(i));
}

TEST_CASE("generator shape errors") {
    Generator g(3, 1);
    Rng rng(1);
    CHECK_THROWS(generator_forward(g, randn(rng, {3, 16, 16}), randn(rng, {3, 16, 14})));
    CHECK_THROWS(generator_forward(g, randn(rng, {1, 16, 16}), randn(rng, {1, 16, 16})));
    CHECK_THROWS(generator_forward(g, randn(rng, {3, 15, 16}), randn(rng, {1, 15, 16})));
    CHECK_THROWS(generator_forward(g, randn(rng, {3, 16, 16}), randn(rng, {2, 16, 16})));
}

TEST_CASE("discriminator gives one logit per sample") {
    Discriminator d(3, 1);
    Rng rng(3);
    const Tensor logits = d.forward(randn(rng, {4, 3, 16, 16}), randn(rng, {4, 1, 16, 16}));
    CHECK(logits.shape() == Shape{4, 1, 1, 1});
}

TEST_CASE("binary cross-entropy on logits") {
    CHECK(bce_with_logits(Tensor({1}, {0.0f}), true).item() == doctest::Approx(std::log(2.0)));
    CHECK(bce_with_logits(Tensor({1}, {0.0f}), false).item() == doctest::Approx(std::log(2.0)));
    CHECK(bce_with_logits(Tensor({1}, {30.0f}), true).item() < 1e-6f);
    CHECK(bce_with_logits(Tensor({1}, {30.0f}), false).item() == doctest::Approx(30.0f));
    // Mean over samples of -log(sigmoid(z)).
    const float z = 1.5f;
    CHECK(bce_with_logits(Tensor({2}, {z, -z}), true).item() ==
          doctest::Approx(0.5 * (std::log1p(std::exp(-z)) + std::log1p(std::exp(z)))));
}

TEST_CASE("untrained losses sit near ln 2 without the reconstruction term") {
    GanTrainConfig cfg;
    cfg.lambda_l1 = 0.0f;
    Generator g(3, 10);
    Discriminator d(3, 11);
    Adam opt_g({.lr = cfg.lr_g, .beta1 = cfg.beta1}), opt_d({.lr = cfg.lr_d, .beta1 = cfg.beta1});
    Rng rng(12);
    const GanLosses l = gan_train_step(g, d, toy_batch(16, 1), rng, cfg, RunConfig{}.schedule(), opt_g, opt_d);
    CHECK(std::fabs(l.generator - std::log(2.0)) <= 0.3);
    CHECK(std::fabs(l.discriminator - std::log(2.0)) <= 0.3);
    CHECK(opt_g.state().t == 1);
    CHECK(opt_d.state().t == 1);
}

TEST_CASE("alternating updates touch only their own network") {
    GanTrainConfig cfg;
    Generator g(3, 1);
    Discriminator d(3, 2);
    Adam opt_g({.lr = cfg.lr_g}), opt_d({.lr = cfg.lr_d});
    Rng rng(3);
    const GanBatch batch = prepare_gan_batch(toy_batch(4, 2), rng, cfg, RunConfig{}.schedule());

    const auto g0 = g.params().snapshot();
    const auto d0 = d.params().snapshot();
    discriminator_update(g, d, batch, opt_d);
    CHECK(g.params().snapshot() == g0);
    const auto d1 = d.params().snapshot();
    CHECK(d1 != d0);

    generator_update(g, d, batch, cfg, opt_g);
    CHECK(d.params().snapshot() == d1);
    CHECK(g.params().snapshot() != g0);
}

TEST_CASE("corrupted batches") {
    GanTrainConfig cfg;
    cfg.noise_cond_prob = 0.0f;
    Rng rng(4);
    const NoiseSchedule s = RunConfig{}.schedule();
    const Tensor clean = toy_batch(6, 3);
    const GanBatch b = prepare_gan_batch(clean, rng, cfg, s);
    CHECK(b.mask.shape() == Shape{6, 1, 16, 16});
    CHECK(b.state.shape() == clean.shape());
    for (float v : b.mask.data()) CHECK((v == 0.0f || v == 1.0f));
    // With mask conditioning, every channel of the conditioning is the mask.
    for (int n = 0; n < 6; ++n)
        for (int c = 0; c < 3; ++c)
            for (int i = 0; i < 256; ++i) CHECK(b.conditioning.at((n * 3 + c) * 256 + i) == b.mask.at(n * 256 + i));
    CHECK_THROWS(prepare_gan_batch(Tensor::zeros({3, 16, 16}), rng, cfg, s));
}

TEST_CASE("hole noise lands only inside the hole") {
    GanTrainConfig quiet, loud;
    quiet.noise_cond_prob = loud.noise_cond_prob = 0.0f;
    quiet.hole_noise_max = 0.0f;
    loud.hole_noise_max = 1.0f;
    const NoiseSchedule s = RunConfig{}.schedule();
    const Tensor clean = toy_batch(6, 5);
    Rng r1(8), r2(8);
    const GanBatch a = prepare_gan_batch(clean, r1, quiet, s);
    const GanBatch b = prepare_gan_batch(clean, r2, loud, s);
    CHECK(std::ranges::equal(a.mask.data(), b.mask.data()));
    int changed = 0;
    for (int n = 0; n < 6; ++n)
        for (int c = 0; c < 3; ++c)
            for (int i = 0; i < 256; ++i) {
                const std::size_t k = static_cast<std::size_t>((n * 3 + c) * 256 + i);
                if (b.mask.at(n * 256 + i) == 0.0f) CHECK(a.state.at(k) == b.state.at(k));
                else changed += a.state.at(k) != b.state.at(k);
            }
    CHECK(changed > 0);
    loud.hole_noise_max = -1.0f;
    CHECK_THROWS(loud.validate());
}

TEST_CASE("loop chains follow the stabilized update") {
    const auto data = toy_images(5, 6);
    GanTrainConfig cfg;
    cfg.batch_size = 4;
    cfg.chain_fraction = 0.5f;
    cfg.loop_steps = 25;
    REQUIRE(cfg.loop_chains() == 2);

    cfg.chain_final_prob = 1.0f;
    Rng r1(3);
    LoopChains final_only(data, cfg, r1);
    const GanBatch f = final_only.inputs(r1);
    CHECK(f.state.shape() == Shape{2, 3, 16, 16});
    // Final-call slots: masked image as is, mask as conditioning.
    for (int n = 0; n < 2; ++n)
        for (int i = 0; i < 3 * 256; ++i) {
            const std::size_t k = static_cast<std::size_t>(n * 768 + i);
            const float m = f.mask.at(n * 256 + i % 256);
            CHECK(f.conditioning.at(k) == m);
            CHECK(f.state.at(k) == (m != 0.0f ? 0.0f : f.clean.at(k)));
        }
    final_only.advance(Tensor::zeros(f.state.shape()));
    CHECK(std::ranges::equal(final_only.inputs(r1).state.data(), f.state.data()));

    cfg.chain_final_prob = 0.0f;
    Rng r2(3);
    LoopChains steps(data, cfg, r2);
    const GanBatch a = steps.inputs(r2);
    // Zero output: the state shrinks by 1 - sqrt(1/T) and the next input adds
    // fresh noise of std sqrt(2/T) on top.
    steps.advance(Tensor::zeros(a.state.shape()));
    const GanBatch b = steps.inputs(r2);
    CHECK(std::ranges::equal(a.conditioning.data(), b.conditioning.data()));
    double ss = 0.0;
    for (std::size_t k = 0; k < a.state.numel(); ++k) {
        const double d = b.state.at(k) - 0.8 * a.state.at(k);
        ss += d * d;
    }
    CHECK(std::sqrt(ss / a.state.numel()) == doctest::Approx(std::sqrt(2.0 / 25)).epsilon(0.1));
    CHECK_THROWS(steps.advance(Tensor::zeros({1, 3, 16, 16})));
}

TEST_CASE("gan training is deterministic") {
    const auto data = toy_images(10, 4);
    GanTrainConfig cfg;
    cfg.steps = 3;
    cfg.batch_size = 4;
    cfg.seed = 5;
    const NoiseSchedule s = RunConfig{}.schedule();
    Generator g1(3, 1), g2(3, 1);
    Discriminator d1(3, 2), d2(3, 2);
    const auto h1 = train_gan(g1, d1, data, s, cfg);
    const auto h2 = train_gan(g2, d2, data, s, cfg);
    REQUIRE(h1.size() == 3);
    for (std::size_t i = 0; i < h1.size(); ++i) {
        CHECK(h1[i].generator == h2[i].generator);
        CHECK(h1[i].discriminator == h2[i].discriminator);
    }
    CHECK(g1.params().snapshot() == g2.params().snapshot());
    CHECK(d1.params().snapshot() == d2.params().snapshot());
    CHECK_THROWS_WITH(train_gan(g1, d1, {}, s, cfg), doctest::Contains("empty batch"));
    cfg.lr_g = 0.0f;
    CHECK_THROWS(train_gan(g1, d1, data, s, cfg));
}

TEST_CASE("generator L1 measurement has no side effects") {
    GanTrainConfig cfg;
    Generator g(3, 1);
    Rng rng(6);
    const GanBatch b = prepare_gan_batch(toy_batch(4, 5), rng, cfg, RunConfig{}.schedule());
    const auto before = g.params().snapshot();
    const float l1 = generator_l1(g, b);
    CHECK(l1 > 0.0f);
    CHECK(generator_l1(g, b) == l1);
    CHECK(g.params().snapshot() == before);
}
