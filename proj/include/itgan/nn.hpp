#pragma once

#include "itgan/common.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace itgan::nn {

enum class Activation { Linear, ReLU, LeakyReLU, Sigmoid, Softmax };

inline constexpr double kLeakySlope = 0.2;

enum class LayerKind { Dense, Conv1D, MaxPool1D, Dropout, Flatten };

enum class Padding { Same, Valid };

struct LayerSpec {
    LayerKind kind = LayerKind::Dense;
    std::size_t units = 0;    // Dense units or Conv1D filters
    std::size_t kernel = 0;   // Conv1D
    Padding padding = Padding::Same;
    std::size_t width = 0;    // MaxPool1D
    double rate = 0.0;        // Dropout
    Activation activation = Activation::Linear;

    static LayerSpec dense(std::size_t units, Activation a);
    static LayerSpec conv1d(std::size_t filters, std::size_t kernel, Padding p, Activation a);
    static LayerSpec maxpool(std::size_t width);
    static LayerSpec dropout(double rate);
    static LayerSpec flatten();

    bool operator==(const LayerSpec&) const = default;
};

// Activations are laid out position-major: element (pos, channel) of a
// sample lives at column pos * channels + channel.  Flat vectors are length 1.
struct Shape {
    std::size_t length = 1;
    std::size_t channels = 1;

    std::size_t size() const { return length * channels; }
    bool operator==(const Shape&) const = default;
};

struct NetworkSpec {
    Shape input;
    std::vector<LayerSpec> layers;

    // Output shape of every layer; throws on an inconsistent chain.
    std::vector<Shape> shapes() const;
    void validate() const;
    bool operator==(const NetworkSpec&) const = default;
};

enum class Mode { Train, Eval };

struct Layer {
    LayerSpec spec;
    Shape in_shape;
    Shape out_shape;
    Matrix weight;  // Dense: in x units, Conv1D: (kernel * in_channels) x filters
    Matrix bias;    // 1 x units

    // forward cache
    Matrix input;
    Matrix pre;     // pre-activation
    Matrix output;
    Matrix cols;    // conv im2col patches
    Matrix mask;    // dropout keep mask (already scaled)
    std::vector<Eigen::Index> argmax;  // max-pool winners

    bool has_params() const { return spec.kind == LayerKind::Dense || spec.kind == LayerKind::Conv1D; }
};

struct Network {
    NetworkSpec spec;
    std::vector<Layer> layers;
    Mode mode = Mode::Train;
    bool has_cache = false;

    std::size_t input_width() const { return spec.input.size(); }
    std::size_t output_width() const;
    std::size_t parameter_count() const;
    // Pointers to every trainable array in a fixed order (weight, bias per
    // parametrized layer).
    std::vector<Matrix*> parameters();
    std::vector<const Matrix*> parameters() const;
    bool all_finite() const;
};

double glorot_limit(std::size_t fan_in, std::size_t fan_out);

Network init_network(const NetworkSpec& spec, std::uint64_t seed);

// Forward pass recording intermediates for backward.  Dropout is active only
// when net.mode == Mode::Train.
Matrix forward(Network& net, const Matrix& batch, Rng& rng);

// Side-effect free evaluation (dropout disabled).
Matrix predict(const Network& net, const Matrix& batch);

struct Gradients {
    std::vector<Matrix> params;  // aligned with Network::parameters()
    Matrix input;                // dLoss/dInput
};

Gradients backward(Network& net, const Matrix& loss_grad);

struct LossResult {
    double value = 0.0;
    Matrix grad;  // dLoss/dOutput
};

// Mean binary cross-entropy over all entries; predictions clamped to
// [1e-7, 1 - 1e-7] before the log.
LossResult bce_loss(const Matrix& pred, const Matrix& target);
// Mean softmax cross-entropy from logits.
double softmax_ce_loss(const Matrix& logits, const std::vector<int>& classes);
// Mean cross-entropy of softmax probabilities; gradient w.r.t. the probabilities.
LossResult categorical_ce_loss(const Matrix& probs, const std::vector<int>& classes);

Matrix softmax_rows(const Matrix& logits);
double apply_activation(Activation a, double x);

struct AdamState {
    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long t = 0;
    std::vector<Matrix> m;
    std::vector<Matrix> v;

    static AdamState for_params(const std::vector<Matrix*>& params, double lr, double beta1, double beta2 = 0.999,
                                double epsilon = 1e-8);
};

// Generic Adam update with bias correction over aligned parameter/gradient
// lists.
void adam_update(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads, AdamState& state);
void adam_step(Network& net, const Gradients& grads, AdamState& state);

using LossFn = std::function<LossResult(const Matrix& output)>;

// Largest relative error between backprop and central-difference gradients
// over every parameter.  Runs with dropout bypassed.
double grad_check(Network& net, const Matrix& batch, const LossFn& loss, double eps = 1e-5);

// Shared binary container: "ITNN" magic, u32 version, then typed records.
inline constexpr std::uint32_t kContainerVersion = 1;

class ContainerWriter {
public:
    explicit ContainerWriter(std::ostream& out, const std::string& kind);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void str(const std::string& s);
    void matrix(const Matrix& m);
    void f64s(const std::vector<double>& v);

private:
    std::ostream& out_;
};

class ContainerReader {
public:
    explicit ContainerReader(std::istream& in);
    const std::string& kind() const { return kind_; }
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    std::string str();
    Matrix matrix();
    std::vector<double> f64s();

private:
    void read(void* dst, std::size_t n);
    std::istream& in_;
    std::string kind_;
};

// Reads only the kind tag of a container file.
std::string peek_container_kind(const std::string& path);

void write_network(ContainerWriter& w, const Network& net);
Network read_network(ContainerReader& r);

}  // namespace itgan::nn
