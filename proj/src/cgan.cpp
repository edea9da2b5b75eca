#include "itgan/cgan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace itgan::cgan {

namespace {

using nn::Activation;
using nn::LayerSpec;

Matrix concat_cols(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), a.cols() + b.cols());
    out.leftCols(a.cols()) = a;
    out.rightCols(b.cols()) = b;
    return out;
}

Matrix lookup(const Matrix& embedding, const std::vector<std::size_t>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), embedding.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = embedding.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

// Adds the embedding slice [offset, offset + embed_dim) of an input gradient
// into the table gradient.
void scatter_embedding(Matrix& dtable, const Matrix& dinput, Eigen::Index offset, const std::vector<std::size_t>& rows) {
    for (std::size_t i = 0; i < rows.size(); ++i)
        dtable.row(static_cast<Eigen::Index>(rows[i])) +=
            dinput.block(static_cast<Eigen::Index>(i), offset, 1, dtable.cols());
}

Matrix normal_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.normal();
    return m;
}

// Cycles through a shuffled permutation of one class's rows, reshuffling
// whenever it is exhausted.
class ClassSampler {
public:
    ClassSampler(std::vector<std::size_t> rows, Rng& rng) : rows_(std::move(rows)), rng_(rng) { reshuffle(); }
    std::size_t next() {
        if (pos_ == rows_.size()) reshuffle();
        return rows_[pos_++];
    }

private:
    void reshuffle() {
        std::shuffle(rows_.begin(), rows_.end(), rng_.engine());
        pos_ = 0;
    }
    std::vector<std::size_t> rows_;
    Rng& rng_;
    std::size_t pos_ = 0;
};

void validate_config(const CganConfig& c, std::size_t feature_count) {
    require(feature_count >= 1, "cgan needs at least one feature");
    require(c.latent_dim == 0 || c.latent_dim == feature_count, "latent dimension must equal the feature count");
    require(c.epochs >= 1 && c.batch_size >= 1 && c.embed_dim >= 1, "cgan epochs, batch size, embed_dim must be >= 1");
    require(c.lr > 0 && c.beta1 >= 0 && c.beta1 < 1, "invalid Adam settings");
    require(!c.conditioned_classes.empty(), "cgan needs at least one conditioned class");
    auto sorted = c.conditioned_classes;
    std::sort(sorted.begin(), sorted.end());
    require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), "conditioned classes must be unique");
}

}  // namespace

std::size_t GanModel::class_row(int label) const {
    auto it = std::find(config.conditioned_classes.begin(), config.conditioned_classes.end(), label);
    if (it == config.conditioned_classes.end())
        fail(ErrorCode::InvalidArgument, "class " + std::to_string(label) + " is not conditioned in this model");
    return static_cast<std::size_t>(it - config.conditioned_classes.begin());
}

GanModel build_cgan(std::size_t feature_count, CganConfig config) {
    validate_config(config, feature_count);
    if (config.latent_dim == 0) config.latent_dim = feature_count;
    GanModel m;
    m.config = config;
    m.feature_count = feature_count;

    nn::NetworkSpec g;
    g.input = nn::Shape{1, config.latent_dim + config.embed_dim};
    g.layers = {LayerSpec::dense(32, Activation::LeakyReLU), LayerSpec::dense(64, Activation::LeakyReLU),
                LayerSpec::dense(feature_count, Activation::Linear)};
    nn::NetworkSpec d;
    d.input = nn::Shape{1, feature_count + config.embed_dim};
    d.layers = {LayerSpec::dense(256, Activation::LeakyReLU), LayerSpec::dense(128, Activation::LeakyReLU),
                LayerSpec::dropout(0.2), LayerSpec::dense(32, Activation::LeakyReLU),
                LayerSpec::dense(1, Activation::Sigmoid)};
    m.generator = nn::init_network(g, derive_seed(config.seed, 1));
    m.discriminator = nn::init_network(d, derive_seed(config.seed, 2));

    Rng rng(derive_seed(config.seed, 3));
    m.embedding.resize(static_cast<Eigen::Index>(config.conditioned_classes.size()),
                       static_cast<Eigen::Index>(config.embed_dim));
    for (Eigen::Index k = 0; k < m.embedding.size(); ++k) m.embedding.data()[k] = rng.normal();
    return m;
}

Matrix discriminate(const GanModel& model, const Matrix& rows, int label) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(rows.rows()), model.class_row(label));
    return nn::predict(model.discriminator, concat_cols(rows, lookup(model.embedding, idx)));
}

BatchPlan plan_epoch(std::size_t conditioned_rows, std::size_t batch_size, std::size_t n_classes) {
    require(batch_size >= 1 && n_classes >= 1, "invalid batch plan");
    BatchPlan plan;
    plan.steps = std::max<std::size_t>(1, (conditioned_rows + batch_size - 1) / batch_size);
    const std::size_t base = batch_size / n_classes, extra = batch_size % n_classes;
    for (std::size_t s = 0; s < plan.steps; ++s) {
        std::vector<std::size_t> q(n_classes, base);
        for (std::size_t j = 0; j < extra; ++j) q[(s * extra + j) % n_classes] += 1;
        plan.quotas.push_back(std::move(q));
    }
    return plan;
}

GanModel train_cgan(const features::Dataset& train, const CganConfig& config) {
    train.validate();
    if (train.rows() == 0) fail(ErrorCode::InvalidArgument, "cannot train a cgan on an empty dataset");
    if (train.matrix.minCoeff() < 0.0 || train.matrix.maxCoeff() > 1.0)
        fail(ErrorCode::InvalidArgument, "cgan training data must be scaled to [0, 1]");
    GanModel model = build_cgan(train.cols(), config);
    const auto& classes = model.config.conditioned_classes;
    const std::size_t K = classes.size();
    const auto f = static_cast<Eigen::Index>(model.feature_count);
    const std::size_t latent = model.config.latent_dim, batch = model.config.batch_size;

    Rng rng(derive_seed(model.config.seed, 4));
    std::vector<ClassSampler> samplers;
    std::size_t conditioned_rows = 0;
    for (int c : classes) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < train.rows(); ++i)
            if (train.labels[i] == c) rows.push_back(i);
        if (rows.empty()) fail(ErrorCode::InvalidArgument, "conditioned class " + std::to_string(c) + " is absent from the data");
        conditioned_rows += rows.size();
        samplers.emplace_back(std::move(rows), rng);
    }

    auto& G = model.generator;
    auto& D = model.discriminator;
    G.mode = nn::Mode::Train;
    D.mode = nn::Mode::Train;
    auto g_adam = nn::AdamState::for_params(G.parameters(), model.config.lr, model.config.beta1);
    auto d_adam = nn::AdamState::for_params(D.parameters(), model.config.lr, model.config.beta1);
    auto e_adam = nn::AdamState::for_params({&model.embedding}, model.config.lr, model.config.beta1);

    const BatchPlan plan = plan_epoch(conditioned_rows, batch, K);
    auto random_labels = [&](std::size_t n) {
        std::vector<std::size_t> rows(n);
        for (auto& r : rows) r = rng.index(K);
        return rows;
    };

    for (std::size_t epoch = 0; epoch < model.config.epochs; ++epoch) {
        double d_sum = 0.0, g_sum = 0.0;
        for (std::size_t step = 0; step < plan.steps; ++step) {
            // discriminator: real -> 1, fake -> 0
            std::vector<std::size_t> real_idx, real_cls;
            for (std::size_t k = 0; k < K; ++k)
                for (std::size_t q = 0; q < plan.quotas[step][k]; ++q) {
                    real_idx.push_back(samplers[k].next());
                    real_cls.push_back(k);
                }
            Matrix real(static_cast<Eigen::Index>(real_idx.size()), f);
            for (std::size_t i = 0; i < real_idx.size(); ++i)
                real.row(static_cast<Eigen::Index>(i)) = train.matrix.row(static_cast<Eigen::Index>(real_idx[i]));

            const auto fake_cls = random_labels(batch);
            const Matrix fake =
                nn::predict(G, concat_cols(normal_matrix(rng, batch, latent), lookup(model.embedding, fake_cls)));

            std::vector<std::size_t> d_cls = real_cls;
            d_cls.insert(d_cls.end(), fake_cls.begin(), fake_cls.end());
            Matrix d_in(real.rows() + fake.rows(), f);
            d_in.topRows(real.rows()) = real;
            d_in.bottomRows(fake.rows()) = fake;
            Matrix targets = Matrix::Zero(d_in.rows(), 1);
            targets.topRows(real.rows()).setOnes();

            const Matrix d_out = nn::forward(D, concat_cols(d_in, lookup(model.embedding, d_cls)), rng);
            const auto d_loss = nn::bce_loss(d_out, targets);
            const auto d_grads = nn::backward(D, d_loss.grad);
            Matrix d_embed = Matrix::Zero(model.embedding.rows(), model.embedding.cols());
            scatter_embedding(d_embed, d_grads.input, f, d_cls);
            nn::adam_step(D, d_grads, d_adam);
            nn::adam_update({&model.embedding}, {d_embed}, e_adam);

            // generator: non-saturating, fake -> 1
            const auto g_cls = random_labels(batch);
            const Matrix g_embed_rows = lookup(model.embedding, g_cls);
            const Matrix g_out = nn::forward(G, concat_cols(normal_matrix(rng, batch, latent), g_embed_rows), rng);
            const Matrix dg_out = nn::forward(D, concat_cols(g_out, g_embed_rows), rng);
            const auto g_loss = nn::bce_loss(dg_out, Matrix::Ones(dg_out.rows(), 1));
            const auto through_d = nn::backward(D, g_loss.grad);
            const auto g_grads = nn::backward(G, through_d.input.leftCols(f));
            Matrix g_embed = Matrix::Zero(model.embedding.rows(), model.embedding.cols());
            scatter_embedding(g_embed, through_d.input, f, g_cls);
            scatter_embedding(g_embed, g_grads.input, static_cast<Eigen::Index>(latent), g_cls);
            nn::adam_step(G, g_grads, g_adam);
            nn::adam_update({&model.embedding}, {g_embed}, e_adam);

            d_sum += d_loss.value;
            g_sum += g_loss.value;
        }
        const double steps = static_cast<double>(plan.steps);
        model.history.push_back(EpochLoss{d_sum / steps, g_sum / steps});
        if (!std::isfinite(d_sum) || !std::isfinite(g_sum) || !G.all_finite() || !D.all_finite())
            fail(ErrorCode::Internal, "cgan training diverged at epoch " + std::to_string(epoch));
    }
    G.mode = nn::Mode::Eval;
    D.mode = nn::Mode::Eval;
    return model;
}

features::Dataset generate(const GanModel& model, int label, std::size_t n, std::uint64_t seed) {
    if (n == 0) fail(ErrorCode::InvalidArgument, "generate needs n >= 1");
    const std::size_t row = model.class_row(label);
    Rng rng(seed);
    const Matrix z = normal_matrix(rng, n, model.config.latent_dim);
    const std::vector<std::size_t> cls(n, row);
    Matrix out = nn::predict(model.generator, concat_cols(z, lookup(model.embedding, cls)));
    out = out.cwiseMax(0.0).cwiseMin(1.0);
    return features::make_dataset(std::move(out), std::vector<int>(n, label), features::Role::Synthetic);
}

Policy equalize_policy(const features::Dataset& train, const std::vector<int>& classes) {
    const auto counts = train.class_counts();
    std::size_t majority = 0;
    for (const auto& [c, n] : counts) majority = std::max(majority, n);
    Policy p;
    for (int c : classes) p[c] = majority;
    return p;
}

features::Dataset augment_dataset(const features::Dataset& train, const GanModel& model, const Policy& policy,
                                  std::uint64_t seed) {
    train.validate();
    if (train.cols() != model.feature_count) fail(ErrorCode::InvalidArgument, "dataset width does not match the cgan");
    features::Dataset out = train;
    const auto counts = train.class_counts();
    for (const auto& [label, target] : policy) {
        const auto it = counts.find(label);
        const std::size_t have = it == counts.end() ? 0 : it->second;
        if (target < have) {
            warn("augment target " + std::to_string(target) + " for class " + std::to_string(label) +
                 " is below its current count " + std::to_string(have) + "; left unchanged");
            continue;
        }
        if (target == have) continue;
        out.append(generate(model, label, target - have, derive_seed(seed, static_cast<std::uint64_t>(label))));
    }
    out.role = features::Role::Augment;
    return out;
}

void save_gan(const GanModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path);
    nn::ContainerWriter w(out, "cgan");
    const auto& c = model.config;
    w.u64(model.feature_count);
    w.u64(c.latent_dim);
    w.u64(c.epochs);
    w.u64(c.batch_size);
    w.f64(c.lr);
    w.f64(c.beta1);
    w.u64(c.embed_dim);
    w.u64(c.seed);
    w.u32(static_cast<std::uint32_t>(c.conditioned_classes.size()));
    for (int k : c.conditioned_classes) w.u32(static_cast<std::uint32_t>(k));
    nn::write_network(w, model.generator);
    nn::write_network(w, model.discriminator);
    w.matrix(model.embedding);
    w.u64(model.history.size());
    for (const auto& h : model.history) {
        w.f64(h.discriminator);
        w.f64(h.generator);
    }
    if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

GanModel load_gan(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path);
    nn::ContainerReader r(in);
    if (r.kind() != "cgan") fail(ErrorCode::Parse, path + " holds a '" + r.kind() + "' model, not a cgan");
    GanModel m;
    m.feature_count = r.u64();
    auto& c = m.config;
    c.latent_dim = r.u64();
    c.epochs = r.u64();
    c.batch_size = r.u64();
    c.lr = r.f64();
    c.beta1 = r.f64();
    c.embed_dim = r.u64();
    c.seed = r.u64();
    const auto k = r.u32();
    if (k > 64) fail(ErrorCode::Parse, "corrupt class list in " + path);
    c.conditioned_classes.clear();
    for (std::uint32_t i = 0; i < k; ++i) c.conditioned_classes.push_back(static_cast<int>(r.u32()));
    m.generator = nn::read_network(r);
    m.discriminator = nn::read_network(r);
    m.embedding = r.matrix();
    const auto n = r.u64();
    if (n > (1u << 24)) fail(ErrorCode::Parse, "corrupt history in " + path);
    for (std::uint64_t i = 0; i < n; ++i) {
        EpochLoss h;
        h.discriminator = r.f64();
        h.generator = r.f64();
        m.history.push_back(h);
    }
    return m;
}

}  // namespace itgan::cgan
