#pragma once

#include "itgan/features.hpp"
#include "itgan/nn.hpp"

#include <string>
#include <vector>

namespace itgan::nnclf {

enum class Arch { Mlp, Cnn1d };

std::string_view arch_name(Arch a);  // "mlp" / "cnn1d"

struct TrainParams {
    std::size_t epochs = 100;
    std::size_t batch = 64;
    double lr = 1e-3;
    std::uint64_t seed = 0;
};

struct MlpParams : TrainParams {
    std::vector<std::size_t> hidden{64, 32};
    nn::Activation activation = nn::Activation::ReLU;
};

struct ConvBlock {
    std::size_t filters = 16;
    std::size_t kernel = 3;
};

struct CnnParams : TrainParams {
    std::vector<ConvBlock> conv{{16, 3}, {32, 3}};
    std::size_t pool = 2;  // applied after the first conv block
    std::size_t dense = 32;
};

struct NnModel {
    Arch arch = Arch::Mlp;
    nn::Network net;
    std::size_t n_classes = 0;
    std::vector<double> loss_history;  // mean training loss per epoch
};

nn::NetworkSpec mlp_spec(std::size_t n_features, std::size_t n_classes, const MlpParams& p);
// Features are read as a length-n, 1-channel sequence.
nn::NetworkSpec cnn1d_spec(std::size_t n_features, std::size_t n_classes, const CnnParams& p);

// n_classes = 0 infers max label + 1.
NnModel train_mlp(const features::Dataset& train, const MlpParams& p, std::size_t n_classes = 0);
NnModel train_cnn1d(const features::Dataset& train, const CnnParams& p, std::size_t n_classes = 0);

Matrix predict_proba(const NnModel& model, const Matrix& rows);
// Argmax of the class probabilities; ties go to the lowest index.
std::vector<int> predict_nn(const NnModel& model, const Matrix& rows);

void save_nn(const NnModel& model, const std::string& path);
NnModel load_nn(const std::string& path);

}  // namespace itgan::nnclf
