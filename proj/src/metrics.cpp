#include "itgan/metrics.hpp"

#include <cmath>

namespace itgan::metrics {

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

ConfusionMatrix ConfusionMatrix::from_rows(std::vector<std::vector<long>> rows) {
    ConfusionMatrix cm(rows.size());
    for (const auto& r : rows) {
        if (r.size() != rows.size()) fail(ErrorCode::InvalidArgument, "confusion matrix must be square");
        for (long v : r)
            if (v < 0) fail(ErrorCode::InvalidArgument, "confusion counts must be non-negative");
    }
    cm.counts = std::move(rows);
    return cm;
}

long ConfusionMatrix::total() const {
    long n = 0;
    for (const auto& r : counts)
        for (long v : r) n += v;
    return n;
}

long ConfusionMatrix::row_sum(std::size_t c) const {
    long n = 0;
    for (long v : counts[c]) n += v;
    return n;
}

long ConfusionMatrix::col_sum(std::size_t c) const {
    long n = 0;
    for (const auto& r : counts) n += r[c];
    return n;
}

long ConfusionMatrix::trace() const {
    long n = 0;
    for (std::size_t i = 0; i < k; ++i) n += counts[i][i];
    return n;
}

ConfusionMatrix ConfusionMatrix::transposed() const {
    ConfusionMatrix t(k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) t.counts[j][i] = counts[i][j];
    return t;
}

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred, std::size_t k) {
    if (y_true.size() != y_pred.size())
        fail(ErrorCode::InvalidArgument, "confusion: " + std::to_string(y_true.size()) + " labels vs " +
                                             std::to_string(y_pred.size()) + " predictions");
    ConfusionMatrix cm(k);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i], p = y_pred[i];
        if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= k || static_cast<std::size_t>(p) >= k)
            fail(ErrorCode::InvalidArgument, "confusion: class index out of range");
        ++cm.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    }
    return cm;
}

MacroScores macro_prf(const ConfusionMatrix& cm) {
    MacroScores out;
    std::size_t present = 0;
    for (std::size_t c = 0; c < cm.k; ++c) {
        const double tp = static_cast<double>(cm.counts[c][c]);
        ClassScores s;
        s.precision = ratio(tp, static_cast<double>(cm.col_sum(c)));
        s.recall = ratio(tp, static_cast<double>(cm.row_sum(c)));
        s.f1 = ratio(2.0 * s.precision * s.recall, s.precision + s.recall);
        out.per_class.push_back(s);
        if (cm.row_sum(c) > 0) {
            ++present;
            out.precision += s.precision;
            out.recall += s.recall;
            out.f1 += s.f1;
        }
    }
    if (present > 0) {
        out.precision /= static_cast<double>(present);
        out.recall /= static_cast<double>(present);
        out.f1 /= static_cast<double>(present);
    }
    return out;
}

double kappa(const ConfusionMatrix& cm) {
    const double n = static_cast<double>(cm.total());
    if (n == 0.0) return 0.0;
    const double po = static_cast<double>(cm.trace()) / n;
    double pe = 0.0;
    for (std::size_t c = 0; c < cm.k; ++c)
        pe += static_cast<double>(cm.row_sum(c)) * static_cast<double>(cm.col_sum(c));
    pe /= n * n;
    if (pe >= 1.0) return 0.0;
    return (po - pe) / (1.0 - pe);
}

double mcc(const ConfusionMatrix& cm) {
    const double s = static_cast<double>(cm.total());
    const double c = static_cast<double>(cm.trace());
    double pt = 0.0, pp = 0.0, tt = 0.0;
    for (std::size_t k = 0; k < cm.k; ++k) {
        const double t = static_cast<double>(cm.row_sum(k));
        const double p = static_cast<double>(cm.col_sum(k));
        pt += p * t;
        pp += p * p;
        tt += t * t;
    }
    const double den = std::sqrt((s * s - pp) * (s * s - tt));
    if (den == 0.0) return 0.0;
    return (c * s - pt) / den;
}

MetricsBundle evaluate(const ConfusionMatrix& cm) {
    const auto prf = macro_prf(cm);
    MetricsBundle b;
    b.precision_macro = prf.precision;
    b.recall_macro = prf.recall;
    b.f1_macro = prf.f1;
    b.per_class = prf.per_class;
    b.kappa = kappa(cm);
    b.mcc = mcc(cm);
    return b;
}

}  // namespace itgan::metrics
