#include "doctest.h"
#include "support.hpp"
#include "toys.hpp"

#include "itgan/cgan.hpp"

#include <cmath>

using namespace itgan;
using namespace itgan::cgan;

namespace {

features::Dataset scaled_imbalanced(const std::vector<std::size_t>& counts, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> y;
    for (std::size_t c = 0; c < counts.size(); ++c) y.insert(y.end(), counts[c], static_cast<int>(c));
    Matrix x(static_cast<Eigen::Index>(y.size()), 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
    return features::make_dataset(x, y, features::Role::Train);
}

}  // namespace

TEST_CASE("architecture widths") {
    CganConfig cfg;
    cfg.embed_dim = 8;
    auto m = build_cgan(20, cfg);
    CHECK(m.generator.input_width() == 28);
    CHECK(m.generator.output_width() == 20);
    CHECK(m.discriminator.input_width() == 28);
    CHECK(m.discriminator.output_width() == 1);
    CHECK(m.config.latent_dim == 20);
    CHECK(m.embedding.rows() == 3);
    CHECK(m.embedding.cols() == 8);

    const auto& g = m.generator.spec.layers;
    REQUIRE(g.size() == 3);
    CHECK(g[0] == nn::LayerSpec::dense(32, nn::Activation::LeakyReLU));
    CHECK(g[1] == nn::LayerSpec::dense(64, nn::Activation::LeakyReLU));
    CHECK(g[2] == nn::LayerSpec::dense(20, nn::Activation::Linear));
    const auto& d = m.discriminator.spec.layers;
    REQUIRE(d.size() == 5);
    CHECK(d[0] == nn::LayerSpec::dense(256, nn::Activation::LeakyReLU));
    CHECK(d[1] == nn::LayerSpec::dense(128, nn::Activation::LeakyReLU));
    CHECK(d[2] == nn::LayerSpec::dropout(0.2));
    CHECK(d[3] == nn::LayerSpec::dense(32, nn::Activation::LeakyReLU));
    CHECK(d[4] == nn::LayerSpec::dense(1, nn::Activation::Sigmoid));
}

TEST_CASE("config errors") {
    CganConfig cfg;
    cfg.latent_dim = 7;
    CHECK_THROWS_AS(build_cgan(20, cfg), Error);
    CHECK_THROWS_AS(build_cgan(0, CganConfig{}), Error);
    CganConfig none;
    none.conditioned_classes.clear();
    CHECK_THROWS_AS(build_cgan(4, none), Error);
    CganConfig dup;
    dup.conditioned_classes = {1, 1};
    CHECK_THROWS_AS(build_cgan(4, dup), Error);
}

TEST_CASE("discriminator output lies in (0,1) and init is seeded") {
    CganConfig cfg;
    cfg.seed = 4;
    auto a = build_cgan(5, cfg), b = build_cgan(5, cfg);
    CHECK(a.generator.layers[0].weight == b.generator.layers[0].weight);
    CHECK(a.embedding == b.embedding);
    Rng rng(1);
    Matrix rows(50, 5);
    for (Eigen::Index i = 0; i < rows.size(); ++i) rows.data()[i] = rng.uniform(-50, 50);
    auto p = discriminate(a, rows, 2);
    CHECK(p.minCoeff() > 0.0);
    CHECK(p.maxCoeff() < 1.0);
}

TEST_CASE("one epoch on 64 samples") {
    auto ds = scaled_imbalanced({34, 10, 10, 10}, 1);
    CganConfig cfg;
    cfg.epochs = 1;
    cfg.seed = 2;
    auto m = train_cgan(ds, cfg);
    REQUIRE(m.history.size() == 1);
    CHECK(std::isfinite(m.history[0].discriminator));
    CHECK(std::isfinite(m.history[0].generator));
}

TEST_CASE("training preconditions") {
    auto ds = scaled_imbalanced({20, 5, 5}, 1);  // no class 3
    CHECK_THROWS_AS(train_cgan(ds, CganConfig{}), Error);
    auto wide = scaled_imbalanced({20, 5, 5, 5}, 1);
    wide.matrix(0, 0) = 1.5;
    CHECK_THROWS_AS(train_cgan(wide, CganConfig{}), Error);
}

TEST_CASE("balanced batch plan") {
    auto plan = plan_epoch(70, 64, 3);
    CHECK(plan.steps == 2);
    std::vector<std::size_t> total(3, 0);
    for (const auto& q : plan.quotas) {
        std::size_t sum = 0;
        for (std::size_t c = 0; c < 3; ++c) {
            CHECK(q[c] >= 21);  // a 2-row class still gets its quota every step
            total[c] += q[c];
            sum += q[c];
        }
        CHECK(sum == 64);
    }
    CHECK(*std::max_element(total.begin(), total.end()) - *std::min_element(total.begin(), total.end()) <= 1);
    for (std::size_t rows : {1u, 63u, 64u, 65u, 1000u}) {
        auto p = plan_epoch(rows, 64, 3);
        CHECK(p.steps == std::max<std::size_t>(1, (rows + 63) / 64));
    }
}

TEST_CASE("tiny classes train with replacement") {
    auto ds = scaled_imbalanced({40, 2, 2, 2}, 3);
    CganConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 16;
    auto m = train_cgan(ds, cfg);
    CHECK(m.history.size() == 3);
    CHECK(m.generator.all_finite());
}

TEST_CASE("generate contract") {
    auto ds = scaled_imbalanced({40, 6, 6, 6}, 3);
    CganConfig cfg;
    cfg.epochs = 2;
    cfg.seed = 11;
    auto m = train_cgan(ds, cfg);
    auto g = generate(m, 1, 10, 5);
    CHECK(g.rows() == 10);
    CHECK(g.cols() == 3);
    CHECK(g.role == features::Role::Synthetic);
    for (int l : g.labels) CHECK(l == 1);
    CHECK(g.matrix.minCoeff() >= 0.0);
    CHECK(g.matrix.maxCoeff() <= 1.0);
    CHECK(generate(m, 1, 10, 5).matrix == g.matrix);
    CHECK_THROWS_AS(generate(m, 1, 0, 5), Error);
    CHECK_THROWS_AS(generate(m, 0, 3, 5), Error);

    auto again = train_cgan(ds, cfg);
    CHECK(again.generator.layers[2].weight == m.generator.layers[2].weight);
    CHECK(again.history.back().generator == m.history.back().generator);
}

TEST_CASE("augment_dataset policies") {
    auto ds = scaled_imbalanced({900, 30, 50, 20}, 4);
    CganConfig cfg;
    cfg.epochs = 1;
    auto m = train_cgan(ds, cfg);
    auto pol = equalize_policy(ds, {1, 2, 3});
    CHECK(pol == Policy{{1, 900}, {2, 900}, {3, 900}});
    auto aug = augment_dataset(ds, m, pol, 1);
    CHECK(aug.class_counts() == std::map<int, std::size_t>{{0, 900}, {1, 900}, {2, 900}, {3, 900}});
    CHECK(aug.rows() == ds.rows() + (870 + 850 + 880));
    CHECK(aug.role == features::Role::Augment);
    CHECK(aug.matrix.topRows(ds.matrix.rows()) == ds.matrix);
    CHECK(std::equal(ds.labels.begin(), ds.labels.end(), aug.labels.begin()));

    auto same = augment_dataset(ds, m, Policy{{1, 30}, {2, 50}, {3, 20}}, 1);
    CHECK(same.matrix == ds.matrix);
    CHECK(same.labels == ds.labels);

    set_warnings_enabled(false);
    auto lower = augment_dataset(ds, m, Policy{{1, 10}, {2, 60}}, 1);
    set_warnings_enabled(true);
    CHECK(lower.class_counts().at(1) == 30);
    CHECK(lower.class_counts().at(2) == 60);
    CHECK(lower.rows() == ds.rows() + 10);
}

TEST_CASE("save and load") {
    auto ds = scaled_imbalanced({30, 6, 6, 6}, 5);
    CganConfig cfg;
    cfg.epochs = 2;
    auto m = train_cgan(ds, cfg);
    testing::TempDir dir("gan");
    save_gan(m, (dir / "g.bin").string());
    auto back = load_gan((dir / "g.bin").string());
    CHECK(back.embedding == m.embedding);
    CHECK(back.history.size() == m.history.size());
    CHECK(generate(back, 2, 7, 9).matrix == generate(m, 2, 7, 9).matrix);
    CHECK_THROWS_AS(load_gan((dir / "missing.bin").string()), Error);
}

TEST_CASE("toy: conditional fidelity and spread") {
    auto ds = toys::gaussian3(150, 21);
    CganConfig cfg;
    cfg.seed = 21;
    cfg.epochs = 300;
    auto m = train_cgan(ds, cfg);
    for (const auto& h : m.history) {
        CHECK(std::isfinite(h.discriminator));
        CHECK(std::isfinite(h.generator));
    }
    for (int c = 1; c <= 3; ++c) {
        auto g = generate(m, c, 400, 100 + static_cast<std::uint64_t>(c));
        const Eigen::RowVectorXd gm = toys::class_mean(g, c);
        const double own = (gm - toys::class_mean(ds, c)).norm();
        for (int o = 1; o <= 3; ++o)
            if (o != c) CHECK(own < (gm - toys::class_mean(ds, o)).norm());
        CHECK(toys::class_std(g, c) >= 0.2 * toys::class_std(ds, c));
    }
}
