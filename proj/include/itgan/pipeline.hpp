#pragma once

#include "itgan/cgan.hpp"
#include "itgan/config.hpp"
#include "itgan/features.hpp"
#include "itgan/forest.hpp"
#include "itgan/metrics.hpp"
#include "itgan/nnclf.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace itgan::pipeline {

struct AugmentOptions {
    std::size_t smote_k = 5;
    std::size_t cgan_epochs = 300;
    std::size_t cgan_batch = 64;
};

struct Augmented {
    features::Dataset train;                 // real rows first, synthetic rows after
    std::size_t real_rows = 0;
    std::optional<cgan::GanModel> gan;
};

// Every minority class is raised to the majority count; "real" returns the
// training set unchanged.
Augmented build_training_set(const features::Dataset& train, const std::string& method, const AugmentOptions& opt,
                             std::uint64_t seed);

struct ModelOptions {
    std::size_t rf_trees = 100;
    std::size_t xgb_rounds = 100;
    std::size_t xgb_depth = 4;
    std::size_t nn_epochs = 100;
    std::size_t nn_batch = 64;
    double nn_lr = 1e-3;
    std::size_t threads = 1;
};

struct Model {
    std::string kind;  // rf, xgb, mlp, cnn1d
    std::variant<forest::RfModel, forest::GbtModel, nnclf::NnModel> impl;

    std::size_t n_classes() const;
    std::size_t n_features() const;
    std::vector<int> predict(const Matrix& rows) const;
    void save(const std::string& path) const;
    static Model load(const std::string& path);
};

Model train_model(const features::Dataset& train, const std::string& kind, const ModelOptions& opt,
                  std::size_t n_classes, std::uint64_t seed);

struct CellTiming {
    double augment_seconds = 0.0;
    double train_seconds = 0.0;
    double eval_seconds = 0.0;
    bool operator==(const CellTiming&) const = default;
};

struct Cell {
    std::string task;  // "multiclass" or a scenario name in binary mode
    std::string augmentation;
    std::string model;
    std::vector<std::string> classes;
    std::uint64_t seed = 0;
    std::size_t train_rows = 0;
    std::vector<std::size_t> train_class_counts;
    std::string test_hash;
    metrics::MetricsBundle metrics;
    metrics::ConfusionMatrix confusion;
    CellTiming timing;
    bool operator==(const Cell&) const = default;
};

struct EvalReport {
    std::string schema = "itgan-report/1";
    std::uint64_t seed = 0;
    std::string mode;
    config::KeyValues config;
    std::string config_hash;
    std::string corpus_hash;
    std::size_t user_days = 0;
    std::vector<std::size_t> class_counts;  // NonMalicious, S1, S2, S3
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
    std::map<std::string, std::string> test_hashes;  // per task
    std::vector<Cell> cells;
    std::vector<std::string> viz;  // bundle files relative to the output directory
    double total_seconds = 0.0;
    bool operator==(const EvalReport&) const = default;
};

// Copy with every timing field zeroed, for run-to-run comparisons.
EvalReport without_timing(EvalReport r);

std::string to_json(const EvalReport& r);
EvalReport from_json(const std::string& text);
std::string to_markdown(const EvalReport& r);

// Runs the full grid; writes the corpus (when generated), features.csv,
// scaler.csv and the viz bundle under config.out.  Errors carry the stage
// name and the cell identity.
EvalReport run_pipeline(const config::RunConfig& config);

// Writes report.json and report.md into dir.
void emit_report(const EvalReport& r, const std::string& dir);

struct VizOptions {
    std::size_t tsne_points = 400;
    std::size_t tsne_iters = 500;
    std::uint64_t seed = 0;
};

// KDE of L1 and L5, PCA scatter and t-SNE scatter.  With synthetic rows the
// series compare real minority rows against synthetic ones; otherwise the
// series are the classes of `real`.  Returns the SVG paths written.
std::vector<std::string> write_viz_bundle(const features::Dataset& real, const features::Dataset* synthetic,
                                          const std::string& dir, const VizOptions& opt);

}  // namespace itgan::pipeline
