#pragma once

#include "itgan/features.hpp"

#include <algorithm>
#include <vector>

namespace smote_oracle {

using namespace itgan;

// Brute force: is `p` on a segment between some class row x and one of x's
// k nearest same-class neighbours?  Distance ties at the k-th place admit
// every tied candidate.
inline bool explained(const Matrix& original, const std::vector<int>& labels, int cls,
                      const Eigen::RowVectorXd& p, std::size_t k, double tol = 1e-9) {
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == cls) rows.push_back(static_cast<Eigen::Index>(i));
    for (Eigen::Index a : rows) {
        const Eigen::RowVectorXd x = original.row(a);
        std::vector<std::pair<double, Eigen::Index>> dist;
        for (Eigen::Index b : rows)
            if (b != a) dist.emplace_back((original.row(b) - x).squaredNorm(), b);
        std::sort(dist.begin(), dist.end());
        const std::size_t kk = std::min(k, dist.size());
        if (kk == 0) {
            if ((p - x).norm() <= tol) return true;
            continue;
        }
        const double cutoff = dist[kk - 1].first;
        for (const auto& [d, b] : dist) {
            if (d > cutoff) break;
            const Eigen::RowVectorXd seg = original.row(b) - x;
            const double len2 = seg.squaredNorm();
            double lambda = len2 > 0 ? (p - x).dot(seg) / len2 : 0.0;
            lambda = std::clamp(lambda, 0.0, 1.0);
            if ((x + lambda * seg - p).norm() <= tol) return true;
        }
    }
    return false;
}

// Three classes in 3-D: a 500-row majority and minorities of 40 and 30.
inline features::Dataset toy(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> y(500, 0);
    y.insert(y.end(), 40, 1);
    y.insert(y.end(), 30, 2);
    Matrix x(static_cast<Eigen::Index>(y.size()), 3);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (int j = 0; j < 3; ++j) x(i, j) = rng.uniform() + y[static_cast<std::size_t>(i)];
    return features::make_dataset(x, y, features::Role::Train);
}

}  // namespace smote_oracle
