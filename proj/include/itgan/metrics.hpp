#pragma once

#include "itgan/common.hpp"

#include <vector>

namespace itgan::metrics {

// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
    std::size_t k = 0;
    std::vector<std::vector<long>> counts;

    explicit ConfusionMatrix(std::size_t classes = 0) : k(classes), counts(classes, std::vector<long>(classes, 0)) {}
    static ConfusionMatrix from_rows(std::vector<std::vector<long>> rows);

    long total() const;
    long row_sum(std::size_t c) const;
    long col_sum(std::size_t c) const;
    long trace() const;
    ConfusionMatrix transposed() const;
    bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool operator==(const ClassScores&) const = default;
};

struct MacroScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::vector<ClassScores> per_class;
};

struct MetricsBundle {
    double precision_macro = 0.0;
    double recall_macro = 0.0;
    double f1_macro = 0.0;
    double kappa = 0.0;
    double mcc = 0.0;
    std::vector<ClassScores> per_class;
    bool operator==(const MetricsBundle&) const = default;
};

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred, std::size_t k);

// Macro mean over the classes present in y_true (non-zero row sums).
MacroScores macro_prf(const ConfusionMatrix& cm);

// Cohen's kappa; 0 when expected agreement is 1.
double kappa(const ConfusionMatrix& cm);

// Multiclass Matthews correlation (Gorodkin R_K); 0 on a zero denominator.
double mcc(const ConfusionMatrix& cm);

MetricsBundle evaluate(const ConfusionMatrix& cm);

}  // namespace itgan::metrics
