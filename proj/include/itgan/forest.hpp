#pragma once

#include "itgan/features.hpp"
#include "itgan/nn.hpp"

#include <vector>

namespace itgan::forest {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // go left when value <= threshold
    int left = -1;
    int right = -1;
    std::vector<double> leaf;  // RF: class-vote histogram; GBT: {score}
    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    const TreeNode& leaf_for(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    std::size_t depth() const;
};

double gini(const std::vector<double>& class_counts);

struct RfParams {
    std::size_t n_trees = 100;
    std::size_t max_depth = 0;  // 0 = unlimited
    std::size_t min_leaf = 1;
    std::size_t mtry = 0;  // 0 = floor(sqrt(feature count))
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

struct RfModel {
    std::size_t n_classes = 0;
    std::size_t n_features = 0;
    std::vector<Tree> trees;
};

// Row indices of every column of x sorted by value (ties by row index).
std::vector<std::vector<std::size_t>> presort(const Matrix& x);

// One CART tree, grown level by level with the Gini criterion.  `weights`
// holds each row's multiplicity (bootstrap counts; 0 = unused).  Split
// thresholds are midpoints of consecutive distinct values; ties go to the
// lowest feature index, then the lowest threshold.  Each child keeps at
// least `min_leaf` weighted rows and a split must reduce impurity.
Tree build_gini_tree(const Matrix& x, const std::vector<int>& y, const std::vector<double>& weights,
                     const std::vector<std::vector<std::size_t>>& sorted, std::size_t n_classes,
                     std::size_t max_depth, std::size_t min_leaf, std::size_t mtry, Rng& rng);

RfModel train_rf(const features::Dataset& train, const RfParams& params, std::size_t n_classes = 0);
// Per row, how many trees voted for each class.
std::vector<std::vector<std::size_t>> vote_histograms(const RfModel& model, const Matrix& rows);
std::vector<int> predict_rf(const RfModel& model, const Matrix& rows);

struct GbtParams {
    std::size_t rounds = 100;
    std::size_t max_depth = 4;
    double eta = 0.3;
    double lambda = 1.0;
    double min_child_weight = 1.0;
    std::uint64_t seed = 0;
};

struct GbtModel {
    std::size_t n_classes = 0;
    std::size_t n_features = 0;
    double eta = 0.3;
    std::vector<std::vector<Tree>> rounds;  // rounds[r][class]
    std::vector<double> train_loss;         // multiclass log-loss after each round
};

double leaf_weight(double grad_sum, double hess_sum, double lambda);

GbtModel train_gbt(const features::Dataset& train, const GbtParams& params, std::size_t n_classes = 0);
Matrix gbt_scores(const GbtModel& model, const Matrix& rows);
Matrix predict_proba_gbt(const GbtModel& model, const Matrix& rows);
std::vector<int> predict_gbt(const GbtModel& model, const Matrix& rows);

// Lowest index wins ties.
int argmax(const Eigen::Ref<const Eigen::RowVectorXd>& v);

void write_tree(nn::ContainerWriter& w, const Tree& t);
Tree read_tree(nn::ContainerReader& r);
void save_rf(const RfModel& m, const std::string& path);
RfModel load_rf(const std::string& path);
void save_gbt(const GbtModel& m, const std::string& path);
GbtModel load_gbt(const std::string& path);

}  // namespace itgan::forest
