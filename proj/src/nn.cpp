#include "itgan/nn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace itgan::nn {

namespace {

constexpr double kProbClamp = 1e-7;

void add_bias(Matrix& m, const Matrix& bias) { m.rowwise() += bias.row(0); }

Matrix activate(Activation a, const Matrix& pre) {
    switch (a) {
        case Activation::Linear: return pre;
        case Activation::ReLU: return pre.cwiseMax(0.0);
        case Activation::LeakyReLU: return pre.unaryExpr([](double x) { return x > 0 ? x : kLeakySlope * x; });
        case Activation::Sigmoid: return pre.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
        case Activation::Softmax: return softmax_rows(pre);
    }
    return pre;
}

// dLoss/dPre from dLoss/dOut.
Matrix activation_backward(Activation a, const Matrix& pre, const Matrix& out, const Matrix& grad) {
    switch (a) {
        case Activation::Linear: return grad;
        case Activation::ReLU: return grad.array() * (pre.array() > 0.0).cast<double>();
        case Activation::LeakyReLU:
            return grad.array() * pre.unaryExpr([](double x) { return x > 0 ? 1.0 : kLeakySlope; }).array();
        case Activation::Sigmoid: return grad.array() * out.array() * (1.0 - out.array());
        case Activation::Softmax: {
            Eigen::VectorXd dot = (grad.array() * out.array()).rowwise().sum();
            Matrix g = grad;
            g.colwise() -= dot;
            return g.array() * out.array();
        }
    }
    return grad;
}

std::size_t pad_left(const LayerSpec& s) { return s.padding == Padding::Same ? (s.kernel - 1) / 2 : 0; }

Matrix im2col(const Layer& l, const Matrix& x) {
    const std::size_t L = l.in_shape.length, C = l.in_shape.channels, K = l.spec.kernel;
    const std::size_t Lo = l.out_shape.length, pad = pad_left(l.spec);
    const auto B = static_cast<std::size_t>(x.rows());
    Matrix cols = Matrix::Zero(static_cast<Eigen::Index>(B * Lo), static_cast<Eigen::Index>(K * C));
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t p = 0; p < Lo; ++p)
            for (std::size_t t = 0; t < K; ++t) {
                const auto pos = static_cast<std::ptrdiff_t>(p + t) - static_cast<std::ptrdiff_t>(pad);
                if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(L)) continue;
                for (std::size_t c = 0; c < C; ++c)
                    cols(static_cast<Eigen::Index>(b * Lo + p), static_cast<Eigen::Index>(t * C + c)) =
                        x(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(static_cast<std::size_t>(pos) * C + c));
            }
    return cols;
}

Matrix col2im(const Layer& l, const Matrix& dcols, Eigen::Index batch) {
    const std::size_t L = l.in_shape.length, C = l.in_shape.channels, K = l.spec.kernel;
    const std::size_t Lo = l.out_shape.length, pad = pad_left(l.spec);
    Matrix dx = Matrix::Zero(batch, static_cast<Eigen::Index>(L * C));
    for (std::size_t b = 0; b < static_cast<std::size_t>(batch); ++b)
        for (std::size_t p = 0; p < Lo; ++p)
            for (std::size_t t = 0; t < K; ++t) {
                const auto pos = static_cast<std::ptrdiff_t>(p + t) - static_cast<std::ptrdiff_t>(pad);
                if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(L)) continue;
                for (std::size_t c = 0; c < C; ++c)
                    dx(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(static_cast<std::size_t>(pos) * C + c)) +=
                        dcols(static_cast<Eigen::Index>(b * Lo + p), static_cast<Eigen::Index>(t * C + c));
            }
    return dx;
}

// (B*Lo x F) <-> (B x Lo*F): identical row-major storage.
Matrix reshape(const Matrix& m, Eigen::Index rows, Eigen::Index cols) {
    return Eigen::Map<const Matrix>(m.data(), rows, cols);
}

Matrix conv_pre(const Layer& l, const Matrix& x, Matrix* cols_out) {
    Matrix cols = im2col(l, x);
    Matrix pre = cols * l.weight;
    add_bias(pre, l.bias);
    if (cols_out) *cols_out = std::move(cols);
    return reshape(pre, x.rows(), static_cast<Eigen::Index>(l.out_shape.size()));
}

Matrix maxpool(const Layer& l, const Matrix& x, std::vector<Eigen::Index>* argmax) {
    const std::size_t C = l.in_shape.channels, W = l.spec.width, Lo = l.out_shape.length;
    Matrix out(x.rows(), static_cast<Eigen::Index>(Lo * C));
    if (argmax) argmax->assign(static_cast<std::size_t>(out.size()), 0);
    for (Eigen::Index b = 0; b < x.rows(); ++b)
        for (std::size_t p = 0; p < Lo; ++p)
            for (std::size_t c = 0; c < C; ++c) {
                auto best = static_cast<Eigen::Index>(p * W * C + c);
                for (std::size_t t = 1; t < W; ++t) {
                    auto idx = static_cast<Eigen::Index>((p * W + t) * C + c);
                    if (x(b, idx) > x(b, best)) best = idx;
                }
                const auto o = static_cast<Eigen::Index>(p * C + c);
                out(b, o) = x(b, best);
                if (argmax) (*argmax)[static_cast<std::size_t>(b * out.cols() + o)] = best;
            }
    return out;
}

void check_input(const Network& net, const Matrix& batch) {
    if (static_cast<std::size_t>(batch.cols()) != net.input_width())
        fail(ErrorCode::InvalidArgument, "batch width " + std::to_string(batch.cols()) +
                                             " does not match network input width " +
                                             std::to_string(net.input_width()));
}

}  // namespace

LayerSpec LayerSpec::dense(std::size_t units, Activation a) {
    LayerSpec s;
    s.kind = LayerKind::Dense;
    s.units = units;
    s.activation = a;
    return s;
}

LayerSpec LayerSpec::conv1d(std::size_t filters, std::size_t kernel, Padding p, Activation a) {
    LayerSpec s;
    s.kind = LayerKind::Conv1D;
    s.units = filters;
    s.kernel = kernel;
    s.padding = p;
    s.activation = a;
    return s;
}

LayerSpec LayerSpec::maxpool(std::size_t width) {
    LayerSpec s;
    s.kind = LayerKind::MaxPool1D;
    s.width = width;
    return s;
}

LayerSpec LayerSpec::dropout(double rate) {
    LayerSpec s;
    s.kind = LayerKind::Dropout;
    s.rate = rate;
    return s;
}

LayerSpec LayerSpec::flatten() {
    LayerSpec s;
    s.kind = LayerKind::Flatten;
    return s;
}

std::vector<Shape> NetworkSpec::shapes() const {
    if (input.size() == 0) fail(ErrorCode::InvalidArgument, "network input shape is empty");
    if (layers.empty()) fail(ErrorCode::InvalidArgument, "network has no layers");
    std::vector<Shape> out;
    Shape cur = input;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        const std::string where = "layer " + std::to_string(i) + ": ";
        switch (l.kind) {
            case LayerKind::Dense:
                if (cur.length != 1) fail(ErrorCode::InvalidArgument, where + "dense layer needs a flat input");
                if (l.units == 0) fail(ErrorCode::InvalidArgument, where + "dense layer needs units > 0");
                cur = Shape{1, l.units};
                break;
            case LayerKind::Conv1D: {
                if (l.units == 0 || l.kernel == 0) fail(ErrorCode::InvalidArgument, where + "conv1d needs filters and kernel");
                if (l.activation == Activation::Softmax) fail(ErrorCode::InvalidArgument, where + "conv1d cannot use softmax");
                std::size_t len = cur.length;
                if (l.padding == Padding::Valid) {
                    if (l.kernel > len) fail(ErrorCode::InvalidArgument, where + "kernel longer than input");
                    len = len - l.kernel + 1;
                }
                cur = Shape{len, l.units};
                break;
            }
            case LayerKind::MaxPool1D:
                if (l.width == 0 || l.width > cur.length) fail(ErrorCode::InvalidArgument, where + "bad pool width");
                cur = Shape{cur.length / l.width, cur.channels};
                break;
            case LayerKind::Dropout:
                if (!(l.rate >= 0.0 && l.rate < 1.0)) fail(ErrorCode::InvalidArgument, where + "dropout rate must lie in [0,1)");
                break;
            case LayerKind::Flatten: cur = Shape{1, cur.size()}; break;
        }
        out.push_back(cur);
    }
    auto last = std::find_if(layers.rbegin(), layers.rend(), [](const LayerSpec& l) { return l.kind == LayerKind::Dense || l.kind == LayerKind::Conv1D; });
    if (last == layers.rend()) fail(ErrorCode::InvalidArgument, "network has no trainable layer");
    const Activation fa = last->activation;
    if (fa != Activation::Sigmoid && fa != Activation::Softmax && fa != Activation::Linear)
        fail(ErrorCode::InvalidArgument, "final activation must be sigmoid, softmax, or linear");
    return out;
}

void NetworkSpec::validate() const { (void)shapes(); }

std::size_t Network::output_width() const { return layers.empty() ? 0 : layers.back().out_shape.size(); }

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const auto* p : parameters()) n += static_cast<std::size_t>(p->size());
    return n;
}

std::vector<Matrix*> Network::parameters() {
    std::vector<Matrix*> out;
    for (auto& l : layers)
        if (l.has_params()) {
            out.push_back(&l.weight);
            out.push_back(&l.bias);
        }
    return out;
}

std::vector<const Matrix*> Network::parameters() const {
    std::vector<const Matrix*> out;
    for (const auto& l : layers)
        if (l.has_params()) {
            out.push_back(&l.weight);
            out.push_back(&l.bias);
        }
    return out;
}

bool Network::all_finite() const {
    for (const auto* p : parameters())
        if (!p->allFinite()) return false;
    return true;
}

double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Network init_network(const NetworkSpec& spec, std::uint64_t seed) {
    const auto shapes = spec.shapes();
    Network net;
    net.spec = spec;
    Rng rng(seed);
    Shape in = spec.input;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        Layer l;
        l.spec = spec.layers[i];
        l.in_shape = in;
        l.out_shape = shapes[i];
        std::size_t fan_in = 0, fan_out = 0, rows = 0;
        if (l.spec.kind == LayerKind::Dense) {
            rows = fan_in = in.size();
            fan_out = l.spec.units;
        } else if (l.spec.kind == LayerKind::Conv1D) {
            rows = fan_in = l.spec.kernel * in.channels;
            fan_out = l.spec.kernel * l.spec.units;
        }
        if (l.has_params()) {
            const double limit = glorot_limit(fan_in, fan_out);
            l.weight.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(l.spec.units));
            for (Eigen::Index k = 0; k < l.weight.size(); ++k) l.weight.data()[k] = rng.uniform(-limit, limit);
            l.bias = Matrix::Zero(1, static_cast<Eigen::Index>(l.spec.units));
        }
        net.layers.push_back(std::move(l));
        in = shapes[i];
    }
    return net;
}

Matrix forward(Network& net, const Matrix& batch, Rng& rng) {
    check_input(net, batch);
    const bool train = net.mode == Mode::Train;
    Matrix x = batch;
    for (auto& l : net.layers) {
        l.input = x;
        switch (l.spec.kind) {
            case LayerKind::Dense:
                l.pre = x * l.weight;
                add_bias(l.pre, l.bias);
                l.output = activate(l.spec.activation, l.pre);
                break;
            case LayerKind::Conv1D:
                l.pre = conv_pre(l, x, &l.cols);
                l.output = activate(l.spec.activation, l.pre);
                break;
            case LayerKind::MaxPool1D: l.output = maxpool(l, x, &l.argmax); break;
            case LayerKind::Dropout:
                if (train && l.spec.rate > 0.0) {
                    const double keep = 1.0 - l.spec.rate;
                    l.mask.resize(x.rows(), x.cols());
                    for (Eigen::Index k = 0; k < l.mask.size(); ++k)
                        l.mask.data()[k] = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
                    l.output = x.cwiseProduct(l.mask);
                } else {
                    l.mask.resize(0, 0);
                    l.output = x;
                }
                break;
            case LayerKind::Flatten: l.output = x; break;
        }
        x = l.output;
    }
    net.has_cache = true;
    return x;
}

Matrix predict(const Network& net, const Matrix& batch) {
    check_input(net, batch);
    Matrix x = batch;
    for (const auto& l : net.layers) {
        switch (l.spec.kind) {
            case LayerKind::Dense: {
                Matrix pre = x * l.weight;
                add_bias(pre, l.bias);
                x = activate(l.spec.activation, pre);
                break;
            }
            case LayerKind::Conv1D: x = activate(l.spec.activation, conv_pre(l, x, nullptr)); break;
            case LayerKind::MaxPool1D: x = maxpool(l, x, nullptr); break;
            case LayerKind::Dropout:
            case LayerKind::Flatten: break;
        }
    }
    return x;
}

Gradients backward(Network& net, const Matrix& loss_grad) {
    if (!net.has_cache) fail(ErrorCode::State, "backward called without a cached forward pass");
    const auto& last = net.layers.back();
    if (loss_grad.rows() != last.output.rows() || loss_grad.cols() != last.output.cols())
        fail(ErrorCode::InvalidArgument, "loss gradient shape does not match network output");
    Gradients g;
    std::vector<Matrix> rev;  // collected back to front
    Matrix grad = loss_grad;
    for (auto it = net.layers.rbegin(); it != net.layers.rend(); ++it) {
        Layer& l = *it;
        switch (l.spec.kind) {
            case LayerKind::Dense: {
                Matrix dpre = activation_backward(l.spec.activation, l.pre, l.output, grad);
                rev.push_back(dpre.colwise().sum());
                rev.push_back(l.input.transpose() * dpre);
                grad = dpre * l.weight.transpose();
                break;
            }
            case LayerKind::Conv1D: {
                Matrix dpre = activation_backward(l.spec.activation, l.pre, l.output, grad);
                const auto batch = dpre.rows();
                Matrix dflat = reshape(dpre, batch * static_cast<Eigen::Index>(l.out_shape.length),
                                       static_cast<Eigen::Index>(l.spec.units));
                rev.push_back(dflat.colwise().sum());
                rev.push_back(l.cols.transpose() * dflat);
                grad = col2im(l, dflat * l.weight.transpose(), batch);
                break;
            }
            case LayerKind::MaxPool1D: {
                Matrix dx = Matrix::Zero(l.input.rows(), l.input.cols());
                for (Eigen::Index b = 0; b < grad.rows(); ++b)
                    for (Eigen::Index o = 0; o < grad.cols(); ++o)
                        dx(b, l.argmax[static_cast<std::size_t>(b * grad.cols() + o)]) += grad(b, o);
                grad = std::move(dx);
                break;
            }
            case LayerKind::Dropout:
                if (l.mask.size() == grad.size()) grad = grad.cwiseProduct(l.mask);
                break;
            case LayerKind::Flatten: break;
        }
    }
    // rev holds (bias, weight) pairs from the last layer backwards.
    for (auto it = rev.rbegin(); it != rev.rend(); ++it) g.params.push_back(std::move(*it));
    g.input = std::move(grad);
    return g;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix out = logits;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double mx = out.row(i).maxCoeff();
        out.row(i) = (out.row(i).array() - mx).exp();
        out.row(i) /= out.row(i).sum();
    }
    return out;
}

double apply_activation(Activation a, double x) {
    Matrix m(1, 1);
    m(0, 0) = x;
    return activate(a, m)(0, 0);
}

LossResult bce_loss(const Matrix& pred, const Matrix& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        fail(ErrorCode::InvalidArgument, "bce_loss shape mismatch");
    const double n = static_cast<double>(pred.size());
    LossResult r;
    r.grad.resize(pred.rows(), pred.cols());
    double total = 0.0;
    for (Eigen::Index k = 0; k < pred.size(); ++k) {
        const double p = std::clamp(pred.data()[k], kProbClamp, 1.0 - kProbClamp);
        const double t = target.data()[k];
        total -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
        r.grad.data()[k] = (p - t) / (p * (1.0 - p)) / n;
    }
    r.value = total / n;
    return r;
}

double softmax_ce_loss(const Matrix& logits, const std::vector<int>& classes) {
    if (static_cast<std::size_t>(logits.rows()) != classes.size())
        fail(ErrorCode::InvalidArgument, "softmax_ce_loss: one class per row required");
    double total = 0.0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double mx = logits.row(i).maxCoeff();
        const double lse = mx + std::log((logits.row(i).array() - mx).exp().sum());
        total += lse - logits(i, classes[static_cast<std::size_t>(i)]);
    }
    return total / static_cast<double>(logits.rows());
}

LossResult categorical_ce_loss(const Matrix& probs, const std::vector<int>& classes) {
    if (static_cast<std::size_t>(probs.rows()) != classes.size())
        fail(ErrorCode::InvalidArgument, "categorical_ce_loss: one class per row required");
    const double n = static_cast<double>(probs.rows());
    LossResult r;
    r.grad = Matrix::Zero(probs.rows(), probs.cols());
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        const int c = classes[static_cast<std::size_t>(i)];
        if (c < 0 || c >= probs.cols()) fail(ErrorCode::InvalidArgument, "class index out of range");
        const double p = std::max(probs(i, c), 1e-15);
        r.value -= std::log(p);
        r.grad(i, c) = -1.0 / (p * n);
    }
    r.value /= n;
    return r;
}

AdamState AdamState::for_params(const std::vector<Matrix*>& params, double lr, double beta1, double beta2,
                                double epsilon) {
    AdamState s;
    s.lr = lr;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.epsilon = epsilon;
    for (const auto* p : params) {
        s.m.push_back(Matrix::Zero(p->rows(), p->cols()));
        s.v.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
    return s;
}

void adam_update(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads, AdamState& s) {
    if (params.size() != grads.size()) fail(ErrorCode::InvalidArgument, "adam: gradient count mismatch");
    if (s.m.empty()) {
        for (const auto* p : params) {
            s.m.push_back(Matrix::Zero(p->rows(), p->cols()));
            s.v.push_back(Matrix::Zero(p->rows(), p->cols()));
        }
    }
    if (s.m.size() != params.size()) fail(ErrorCode::InvalidArgument, "adam: state does not match parameters");
    s.t += 1;
    const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
    const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Matrix& p = *params[i];
        const Matrix& g = grads[i];
        if (g.rows() != p.rows() || g.cols() != p.cols()) fail(ErrorCode::InvalidArgument, "adam: gradient shape mismatch");
        s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * g;
        s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * g.cwiseProduct(g);
        p.array() -= s.lr * (s.m[i].array() / c1) / ((s.v[i].array() / c2).sqrt() + s.epsilon);
    }
}

void adam_step(Network& net, const Gradients& grads, AdamState& state) {
    adam_update(net.parameters(), grads.params, state);
}

double grad_check(Network& net, const Matrix& batch, const LossFn& loss, double eps) {
    const Mode saved = net.mode;
    net.mode = Mode::Eval;
    Rng unused(0);
    const Matrix out = forward(net, batch, unused);
    const Gradients analytic = backward(net, loss(out).grad);
    double worst = 0.0;
    auto params = net.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        Matrix& p = *params[i];
        for (Eigen::Index k = 0; k < p.size(); ++k) {
            const double orig = p.data()[k];
            p.data()[k] = orig + eps;
            const double up = loss(predict(net, batch)).value;
            p.data()[k] = orig - eps;
            const double down = loss(predict(net, batch)).value;
            p.data()[k] = orig;
            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic.params[i].data()[k];
            const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
            worst = std::max(worst, rel);
        }
    }
    net.mode = saved;
    return worst;
}

// ---- container --------------------------------------------------------------

ContainerWriter::ContainerWriter(std::ostream& out, const std::string& kind) : out_(out) {
    out_.write("ITNN", 4);
    u32(kContainerVersion);
    str(kind);
}

void ContainerWriter::u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out_.write(reinterpret_cast<const char*>(b), 4);
}

void ContainerWriter::u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out_.write(reinterpret_cast<const char*>(b), 8);
}

void ContainerWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ContainerWriter::str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void ContainerWriter::matrix(const Matrix& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index k = 0; k < m.size(); ++k) f64(m.data()[k]);
}

void ContainerWriter::f64s(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) f64(x);
}

ContainerReader::ContainerReader(std::istream& in) : in_(in) {
    char magic[4];
    read(magic, 4);
    if (std::memcmp(magic, "ITNN", 4) != 0) fail(ErrorCode::Parse, "not an ITNN model container");
    const auto version = u32();
    if (version != kContainerVersion)
        fail(ErrorCode::Parse, "unsupported container version " + std::to_string(version));
    kind_ = str();
}

void ContainerReader::read(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail(ErrorCode::Parse, "truncated model container");
}

std::uint32_t ContainerReader::u32() {
    unsigned char b[4];
    read(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t ContainerReader::u64() {
    unsigned char b[8];
    read(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double ContainerReader::f64() { return std::bit_cast<double>(u64()); }

std::string ContainerReader::str() {
    const auto n = u32();
    if (n > (1u << 24)) fail(ErrorCode::Parse, "corrupt string length in container");
    std::string s(n, '\0');
    if (n) read(s.data(), n);
    return s;
}

Matrix ContainerReader::matrix() {
    const auto rows = u64();
    const auto cols = u64();
    if (rows > (1u << 26) || cols > (1u << 26) || rows * cols > (1u << 28))
        fail(ErrorCode::Parse, "corrupt matrix shape in container");
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = f64();
    return m;
}

std::vector<double> ContainerReader::f64s() {
    const auto n = u64();
    if (n > (1u << 28)) fail(ErrorCode::Parse, "corrupt array length in container");
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
}

std::string peek_container_kind(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open model " + path);
    ContainerReader r(in);
    return r.kind();
}

void write_network(ContainerWriter& w, const Network& net) {
    w.u64(net.spec.input.length);
    w.u64(net.spec.input.channels);
    w.u32(static_cast<std::uint32_t>(net.spec.layers.size()));
    for (const auto& l : net.spec.layers) {
        w.u32(static_cast<std::uint32_t>(l.kind));
        w.u64(l.units);
        w.u64(l.kernel);
        w.u32(static_cast<std::uint32_t>(l.padding));
        w.u64(l.width);
        w.f64(l.rate);
        w.u32(static_cast<std::uint32_t>(l.activation));
    }
    for (const auto* p : net.parameters()) w.matrix(*p);
}

Network read_network(ContainerReader& r) {
    NetworkSpec spec;
    spec.input.length = r.u64();
    spec.input.channels = r.u64();
    const auto n = r.u32();
    if (n > 1024) fail(ErrorCode::Parse, "corrupt layer count in container");
    for (std::uint32_t i = 0; i < n; ++i) {
        LayerSpec l;
        l.kind = static_cast<LayerKind>(r.u32());
        l.units = r.u64();
        l.kernel = r.u64();
        l.padding = static_cast<Padding>(r.u32());
        l.width = r.u64();
        l.rate = r.f64();
        l.activation = static_cast<Activation>(r.u32());
        spec.layers.push_back(l);
    }
    Network net = init_network(spec, 0);
    for (auto* p : net.parameters()) {
        Matrix m = r.matrix();
        if (m.rows() != p->rows() || m.cols() != p->cols()) fail(ErrorCode::Parse, "parameter shape mismatch in container");
        *p = std::move(m);
    }
    net.mode = Mode::Eval;
    return net;
}

}  // namespace itgan::nn
