#pragma once

#include "itgan/common.hpp"
#include "itgan/features.hpp"
#include "itgan/nn.hpp"

#include <map>
#include <string>
#include <vector>

namespace itgan::cgan {

struct CganConfig {
    std::size_t latent_dim = 0;  // 0 = feature count
    std::size_t epochs = 300;
    std::size_t batch_size = 64;
    double lr = 2e-4;
    double beta1 = 0.5;
    std::size_t embed_dim = 8;
    std::vector<int> conditioned_classes{1, 2, 3};
    std::uint64_t seed = 0;
};

struct EpochLoss {
    double discriminator = 0.0;
    double generator = 0.0;
};

struct GanModel {
    nn::Network generator;
    nn::Network discriminator;
    Matrix embedding;  // one row per conditioned class, in conditioned_classes order
    CganConfig config;
    std::size_t feature_count = 0;
    std::vector<EpochLoss> history;

    std::size_t class_row(int label) const;
};

// Generator: (latent + embed) -> 32 LReLU -> 64 LReLU -> features linear.
// Discriminator: (features + embed) -> 256 LReLU -> 128 LReLU, dropout 0.2
// -> 32 LReLU -> 1 sigmoid.
GanModel build_cgan(std::size_t feature_count, CganConfig config);

// Discriminator probability that `rows` are real samples of `label`.
Matrix discriminate(const GanModel& model, const Matrix& rows, int label);

GanModel train_cgan(const features::Dataset& train, const CganConfig& config);

// Per-class real-row draws of one epoch; exposed for the balanced-batch checks.
struct BatchPlan {
    std::size_t steps = 0;
    // per step, per conditioned class (config order): number of real rows
    std::vector<std::vector<std::size_t>> quotas;
};

BatchPlan plan_epoch(std::size_t conditioned_rows, std::size_t batch_size, std::size_t n_classes);

features::Dataset generate(const GanModel& model, int label, std::size_t n, std::uint64_t seed);

// Per-class target counts; classes absent from the map keep their count.
using Policy = std::map<int, std::size_t>;

// Raise each listed class to the majority-class count.
Policy equalize_policy(const features::Dataset& train, const std::vector<int>& classes);

features::Dataset augment_dataset(const features::Dataset& train, const GanModel& model, const Policy& policy,
                                  std::uint64_t seed);

void save_gan(const GanModel& model, const std::string& path);
GanModel load_gan(const std::string& path);

}  // namespace itgan::cgan
