#include "doctest.h"
#include "gradcheck_cases.hpp"
#include "support.hpp"

#include "itgan/nn.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

using namespace itgan;
using namespace itgan::nn;

TEST_CASE("init: shapes, zero bias, determinism, Glorot bound") {
    NetworkSpec one{{1, 1}, {LayerSpec::dense(1, Activation::Linear)}};
    auto net = init_network(one, 3);
    CHECK(net.parameter_count() == 2);
    CHECK(net.layers[0].bias(0, 0) == 0.0);

    NetworkSpec spec{{1, 20}, {LayerSpec::dense(32, Activation::ReLU), LayerSpec::dense(4, Activation::Softmax)}};
    auto a = init_network(spec, 9), b = init_network(spec, 9), c = init_network(spec, 10);
    CHECK(a.layers[0].weight == b.layers[0].weight);
    CHECK(a.layers[0].weight != c.layers[0].weight);
    CHECK(glorot_limit(20, 32) == doctest::Approx(std::sqrt(6.0 / 52.0)));
    CHECK(glorot_limit(20, 32) == doctest::Approx(0.3397).epsilon(1e-4));
    CHECK(a.layers[0].weight.cwiseAbs().maxCoeff() <= glorot_limit(20, 32));
    CHECK(a.layers[0].weight.rows() == 20);
    CHECK(a.layers[0].weight.cols() == 32);
}

TEST_CASE("spec validation") {
    NetworkSpec bad{{1, 4}, {LayerSpec::dense(3, Activation::ReLU)}};
    CHECK_THROWS_AS(bad.validate(), Error);  // hidden activation as output
    NetworkSpec rate{{1, 4}, {LayerSpec::dropout(1.0), LayerSpec::dense(1, Activation::Linear)}};
    CHECK_THROWS_AS(rate.validate(), Error);
    NetworkSpec pool{{3, 1}, {LayerSpec::maxpool(4), LayerSpec::flatten(), LayerSpec::dense(1, Activation::Linear)}};
    CHECK_THROWS_AS(pool.validate(), Error);
    NetworkSpec cnn{{20, 1},
                    {LayerSpec::conv1d(16, 3, Padding::Same, Activation::ReLU), LayerSpec::maxpool(2),
                     LayerSpec::conv1d(32, 3, Padding::Same, Activation::ReLU), LayerSpec::flatten(),
                     LayerSpec::dense(4, Activation::Softmax)}};
    auto shapes = cnn.shapes();
    CHECK(shapes[1] == Shape{10, 16});
    CHECK(shapes[3].size() == 320);
}

TEST_CASE("activations") {
    CHECK(apply_activation(Activation::LeakyReLU, -1.0) == doctest::Approx(-0.2));
    CHECK(apply_activation(Activation::LeakyReLU, 2.0) == 2.0);
    CHECK(apply_activation(Activation::Sigmoid, 0.0) == 0.5);
    CHECK(apply_activation(Activation::ReLU, -3.0) == 0.0);
    Matrix logits(1, 3);
    logits << 1000, 1000, 1000;
    auto p = softmax_rows(logits);
    CHECK(p.sum() == doctest::Approx(1.0));
    CHECK(p(0, 0) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("identity-weight linear layer passes input through") {
    NetworkSpec spec{{1, 3}, {LayerSpec::dense(3, Activation::Linear)}};
    auto net = init_network(spec, 1);
    net.layers[0].weight = Matrix::Identity(3, 3);
    Matrix x(2, 3);
    x << 1, -2, 3, 0.5, 0, -7;
    CHECK(predict(net, x) == x);
    CHECK_THROWS_AS(predict(net, Matrix::Zero(2, 4)), Error);
}

TEST_CASE("losses") {
    Matrix one(1, 1), half(1, 1), t1(1, 1);
    one << 1.0;
    half << 0.5;
    t1 << 1.0;
    CHECK(bce_loss(one, t1).value == doctest::Approx(-std::log(1 - 1e-7)));
    CHECK(bce_loss(one, t1).value < 1e-6);
    CHECK(bce_loss(half, t1).value == doctest::Approx(std::log(2.0)));
    CHECK(bce_loss(half, t1).value == doctest::Approx(0.6931).epsilon(1e-4));
    Matrix uniform = Matrix::Zero(2, 4);
    CHECK(softmax_ce_loss(uniform, {0, 3}) == doctest::Approx(std::log(4.0)));
    CHECK(softmax_ce_loss(uniform, {1, 2}) == doctest::Approx(1.3863).epsilon(1e-4));
    auto ce = categorical_ce_loss(softmax_rows(uniform), {2, 1});
    CHECK(ce.value == doctest::Approx(std::log(4.0)));
    CHECK(ce.value >= 0.0);
}

TEST_CASE("backward basics") {
    NetworkSpec spec{{1, 1}, {LayerSpec::dense(1, Activation::Linear)}};
    auto net = init_network(spec, 1);
    net.layers[0].weight(0, 0) = 0.7;
    Rng rng(0);
    Matrix x(1, 1);
    x << 3.0;
    forward(net, x, rng);
    auto g = backward(net, Matrix::Ones(1, 1));  // loss = y
    CHECK(g.params[0](0, 0) == doctest::Approx(3.0));
    CHECK(g.params[1](0, 0) == doctest::Approx(1.0));

    forward(net, x, rng);
    auto z = backward(net, Matrix::Zero(1, 1));
    for (const auto& p : z.params) CHECK(p.isZero());

    auto fresh = init_network(spec, 1);
    CHECK_THROWS_AS(backward(fresh, Matrix::Zero(1, 1)), Error);
}

TEST_CASE("adam by hand") {
    Matrix theta = Matrix::Zero(1, 1);
    std::vector<Matrix*> params{&theta};
    auto st = AdamState::for_params(params, 2e-4, 0.5);
    adam_update(params, {Matrix::Ones(1, 1)}, st);
    CHECK(st.t == 1);
    CHECK(theta(0, 0) == doctest::Approx(-2e-4).epsilon(1e-6));
    // second identical step: m = 0.5*0.5 + 0.5 = 0.75, v = 0.999*0.001 + 0.001
    adam_update(params, {Matrix::Ones(1, 1)}, st);
    CHECK(st.t == 2);
    CHECK(st.m[0](0, 0) == doctest::Approx(0.75));
    CHECK(st.v[0](0, 0) == doctest::Approx(0.999 * 0.001 + 0.001));
    const double mhat = 0.75 / (1 - 0.25), vhat = (0.999 * 0.001 + 0.001) / (1 - 0.999 * 0.999);
    CHECK(theta(0, 0) == doctest::Approx(-2e-4 - 2e-4 * mhat / (std::sqrt(vhat) + 1e-8)));

    Matrix still = Matrix::Zero(1, 1);
    std::vector<Matrix*> p2{&still};
    auto s2 = AdamState::for_params(p2, 2e-4, 0.5);
    adam_update(p2, {Matrix::Zero(1, 1)}, s2);
    CHECK(still(0, 0) == 0.0);
}

TEST_CASE("gradient check on every stack") {
    NetworkSpec lin{{1, 1}, {LayerSpec::dense(1, Activation::Linear)}};
    CHECK(gradcheck_cases::check(lin, 3, 1) < 1e-9);
    for (const auto& c : gradcheck_cases::run_all()) {
        CAPTURE(c.name);
        CHECK(c.error < 1e-4);
    }
    // softmax head with cross-entropy
    NetworkSpec clf{{1, 5}, {LayerSpec::dense(6, Activation::LeakyReLU), LayerSpec::dense(3, Activation::Softmax)}};
    auto net = init_network(clf, 2);
    Rng rng(2);
    Matrix x = gradcheck_cases::random_matrix(4, 5, rng);
    std::vector<int> y{0, 2, 1, 2};
    CHECK(grad_check(net, x, [&](const Matrix& p) { return categorical_ce_loss(p, y); }) < 1e-4);
}

TEST_CASE("dropout: eval deterministic, train inverted scaling") {
    NetworkSpec spec{{1, 1}, {LayerSpec::dropout(0.5), LayerSpec::dense(1, Activation::Linear)}};
    auto net = init_network(spec, 1);
    net.layers[1].weight(0, 0) = 1.0;
    Matrix x = Matrix::Ones(20000, 1);
    CHECK(predict(net, x) == predict(net, x));
    CHECK(predict(net, x).isOnes());
    Rng rng(4);
    net.mode = Mode::Train;
    Matrix out = forward(net, x, rng);
    for (Eigen::Index i = 0; i < out.rows(); ++i) CHECK((out(i, 0) == 0.0 || out(i, 0) == 2.0));
    CHECK(out.mean() == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("parameters stay finite over 1000 Adam steps") {
    NetworkSpec spec{{1, 4},
                     {LayerSpec::dense(16, Activation::LeakyReLU), LayerSpec::dropout(0.2),
                      LayerSpec::dense(1, Activation::Sigmoid)}};
    auto net = init_network(spec, 8);
    auto st = AdamState::for_params(net.parameters(), 1e-2, 0.5);
    Rng rng(8);
    for (int step = 0; step < 1000; ++step) {
        Matrix x = gradcheck_cases::random_matrix(16, 4, rng);
        Matrix t(16, 1);
        for (Eigen::Index i = 0; i < 16; ++i) t(i, 0) = x(i, 0) > 0 ? 1.0 : 0.0;
        auto out = forward(net, x, rng);
        auto loss = bce_loss(out, t);
        adam_step(net, backward(net, loss.grad), st);
        REQUIRE(net.all_finite());
    }
    CHECK(st.t == 1000);
}

TEST_CASE("container round trip and corruption") {
    NetworkSpec spec{{8, 1},
                     {LayerSpec::conv1d(2, 3, Padding::Same, Activation::ReLU), LayerSpec::maxpool(2),
                      LayerSpec::flatten(), LayerSpec::dense(2, Activation::Softmax)}};
    auto net = init_network(spec, 4);
    std::stringstream buf;
    {
        ContainerWriter w(buf, "test");
        write_network(w, net);
    }
    const std::string bytes = buf.str();
    CHECK(bytes.substr(0, 4) == "ITNN");
    ContainerReader r(buf);
    CHECK(r.kind() == "test");
    auto back = read_network(r);
    CHECK(back.spec == net.spec);
    Rng rng(1);
    Matrix x = gradcheck_cases::random_matrix(3, 8, rng);
    CHECK(predict(back, x) == predict(net, x));

    std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(
        [&] {
            ContainerReader rr(truncated);
            read_network(rr);
        }(),
        Error);
    std::stringstream junk("XXXXjunk");
    CHECK_THROWS_AS(ContainerReader{junk}, Error);

    testing::TempDir dir("nn");
    {
        std::ofstream out(dir / "m.bin", std::ios::binary);
        out << bytes;
    }
    CHECK(peek_container_kind((dir / "m.bin").string()) == "test");
}
