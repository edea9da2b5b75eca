#include "itgan/nnclf.hpp"

#include "itgan/forest.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

namespace itgan::nnclf {

using nn::Activation;
using nn::LayerSpec;

std::string_view arch_name(Arch a) { return a == Arch::Mlp ? "mlp" : "cnn1d"; }

nn::NetworkSpec mlp_spec(std::size_t n_features, std::size_t n_classes, const MlpParams& p) {
    nn::NetworkSpec s;
    s.input = {1, n_features};
    for (std::size_t h : p.hidden) s.layers.push_back(LayerSpec::dense(h, p.activation));
    s.layers.push_back(LayerSpec::dense(n_classes, Activation::Softmax));
    s.validate();
    return s;
}

nn::NetworkSpec cnn1d_spec(std::size_t n_features, std::size_t n_classes, const CnnParams& p) {
    if (p.conv.empty()) fail(ErrorCode::InvalidArgument, "cnn1d needs at least one conv block");
    nn::NetworkSpec s;
    s.input = {n_features, 1};
    for (std::size_t i = 0; i < p.conv.size(); ++i) {
        s.layers.push_back(LayerSpec::conv1d(p.conv[i].filters, p.conv[i].kernel, nn::Padding::Same, Activation::ReLU));
        if (i == 0 && p.pool > 1) s.layers.push_back(LayerSpec::maxpool(p.pool));
    }
    s.layers.push_back(LayerSpec::flatten());
    s.layers.push_back(LayerSpec::dense(p.dense, Activation::ReLU));
    s.layers.push_back(LayerSpec::dense(n_classes, Activation::Softmax));
    s.validate();
    return s;
}

namespace {

std::size_t check_data(const features::Dataset& train, std::size_t n_classes) {
    if (train.rows() == 0) fail(ErrorCode::InvalidArgument, "cannot train a classifier on empty data");
    train.validate();
    const int top = *std::max_element(train.labels.begin(), train.labels.end());
    if (*std::min_element(train.labels.begin(), train.labels.end()) < 0)
        fail(ErrorCode::InvalidArgument, "negative class label");
    if (n_classes == 0) n_classes = static_cast<std::size_t>(top) + 1;
    if (static_cast<std::size_t>(top) >= n_classes) fail(ErrorCode::InvalidArgument, "class label exceeds class count");
    if (train.class_counts().size() < 2) fail(ErrorCode::InvalidArgument, "training data needs at least two classes");
    return n_classes;
}

NnModel fit(Arch arch, const nn::NetworkSpec& spec, const features::Dataset& train, std::size_t n_classes,
            const TrainParams& p) {
    if (p.batch == 0) fail(ErrorCode::InvalidArgument, "batch size must be positive");
    NnModel model;
    model.arch = arch;
    model.n_classes = n_classes;
    model.net = nn::init_network(spec, derive_seed(p.seed, 0));
    Rng rng(derive_seed(p.seed, 1));
    auto state = nn::AdamState::for_params(model.net.parameters(), p.lr, 0.9);
    std::vector<std::size_t> order(train.rows());
    std::iota(order.begin(), order.end(), 0);
    model.net.mode = nn::Mode::Train;
    for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng.engine());
        double total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += p.batch) {
            const std::size_t end = std::min(order.size(), start + p.batch);
            Matrix x(static_cast<Eigen::Index>(end - start), train.matrix.cols());
            std::vector<int> y;
            for (std::size_t i = start; i < end; ++i) {
                x.row(static_cast<Eigen::Index>(i - start)) = train.matrix.row(static_cast<Eigen::Index>(order[i]));
                y.push_back(train.labels[order[i]]);
            }
            const Matrix probs = nn::forward(model.net, x, rng);
            const auto loss = nn::categorical_ce_loss(probs, y);
            nn::adam_step(model.net, nn::backward(model.net, loss.grad), state);
            total += loss.value * static_cast<double>(end - start);
        }
        model.loss_history.push_back(total / static_cast<double>(order.size()));
    }
    model.net.mode = nn::Mode::Eval;
    if (!model.net.all_finite()) fail(ErrorCode::Internal, std::string(arch_name(arch)) + " training diverged");
    return model;
}

}  // namespace

NnModel train_mlp(const features::Dataset& train, const MlpParams& p, std::size_t n_classes) {
    n_classes = check_data(train, n_classes);
    return fit(Arch::Mlp, mlp_spec(train.cols(), n_classes, p), train, n_classes, p);
}

NnModel train_cnn1d(const features::Dataset& train, const CnnParams& p, std::size_t n_classes) {
    n_classes = check_data(train, n_classes);
    return fit(Arch::Cnn1d, cnn1d_spec(train.cols(), n_classes, p), train, n_classes, p);
}

Matrix predict_proba(const NnModel& model, const Matrix& rows) {
    if (static_cast<std::size_t>(rows.cols()) != model.net.input_width())
        fail(ErrorCode::InvalidArgument, "row width does not match the network input");
    return nn::predict(model.net, rows);
}

std::vector<int> predict_nn(const NnModel& model, const Matrix& rows) {
    const Matrix p = predict_proba(model, rows);
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(p.rows()));
    for (Eigen::Index i = 0; i < p.rows(); ++i) out.push_back(forest::argmax(p.row(i)));
    return out;
}

void save_nn(const NnModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path);
    nn::ContainerWriter w(out, std::string(arch_name(model.arch)));
    w.u64(model.n_classes);
    w.f64s(model.loss_history);
    nn::write_network(w, model.net);
    if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

NnModel load_nn(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path);
    nn::ContainerReader r(in);
    NnModel m;
    if (r.kind() == "mlp") m.arch = Arch::Mlp;
    else if (r.kind() == "cnn1d") m.arch = Arch::Cnn1d;
    else fail(ErrorCode::Parse, path + " is not a neural classifier (kind '" + r.kind() + "')");
    m.n_classes = r.u64();
    m.loss_history = r.f64s();
    m.net = nn::read_network(r);
    m.net.mode = nn::Mode::Eval;
    if (m.net.output_width() != m.n_classes) fail(ErrorCode::Parse, path + ": class count does not match network");
    return m;
}

}  // namespace itgan::nnclf
