#include "itgan/resample.hpp"

#include <algorithm>
#include <numeric>

namespace itgan::resample {

namespace {

std::map<int, std::vector<std::size_t>> rows_by_class(const features::Dataset& ds) {
    std::map<int, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < ds.rows(); ++i) out[ds.labels[i]].push_back(i);
    return out;
}

features::Dataset synthetic_block(Matrix rows, int label) {
    const auto n = static_cast<std::size_t>(rows.rows());
    return features::make_dataset(std::move(rows), std::vector<int>(n, label), features::Role::Synthetic);
}

}  // namespace

Policy resolve_policy(const features::Dataset& train, const Policy& policy) {
    if (!policy.empty()) return policy;
    Policy p;
    const auto counts = train.class_counts();
    std::size_t majority = 0;
    for (const auto& [c, n] : counts) majority = std::max(majority, n);
    for (const auto& [c, n] : counts) p[c] = majority;
    return p;
}

features::Dataset ros(const features::Dataset& train, const Policy& policy, std::uint64_t seed) {
    train.validate();
    const auto by_class = rows_by_class(train);
    features::Dataset out = train;
    for (const auto& [label, target] : resolve_policy(train, policy)) {
        auto it = by_class.find(label);
        if (it == by_class.end() || it->second.empty())
            fail(ErrorCode::InvalidArgument, "cannot oversample empty class " + std::to_string(label));
        const auto& rows = it->second;
        if (target <= rows.size()) continue;
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(label)));
        Matrix extra(static_cast<Eigen::Index>(target - rows.size()), train.matrix.cols());
        for (Eigen::Index i = 0; i < extra.rows(); ++i)
            extra.row(i) = train.matrix.row(static_cast<Eigen::Index>(rows[rng.index(rows.size())]));
        out.append(synthetic_block(std::move(extra), label));
    }
    out.role = features::Role::Augment;
    return out;
}

std::vector<std::size_t> nearest_neighbours(const Matrix& data, std::size_t row,
                                            const std::vector<std::size_t>& candidates, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t c : candidates) {
        if (c == row) continue;
        dist.emplace_back((data.row(static_cast<Eigen::Index>(c)) - data.row(static_cast<Eigen::Index>(row))).squaredNorm(), c);
    }
    k = std::min(k, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(dist[i].second);
    return out;
}

features::Dataset smote(const features::Dataset& train, std::size_t k, const Policy& policy, std::uint64_t seed) {
    if (k == 0) fail(ErrorCode::InvalidArgument, "smote needs k >= 1");
    train.validate();
    const auto by_class = rows_by_class(train);
    features::Dataset out = train;
    for (const auto& [label, target] : resolve_policy(train, policy)) {
        auto it = by_class.find(label);
        if (it == by_class.end() || it->second.empty())
            fail(ErrorCode::InvalidArgument, "cannot oversample empty class " + std::to_string(label));
        const auto& rows = it->second;
        if (target <= rows.size()) continue;
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(label)));
        Matrix extra(static_cast<Eigen::Index>(target - rows.size()), train.matrix.cols());
        if (rows.size() == 1) {
            for (Eigen::Index i = 0; i < extra.rows(); ++i) extra.row(i) = train.matrix.row(static_cast<Eigen::Index>(rows[0]));
            out.append(synthetic_block(std::move(extra), label));
            continue;
        }
        const std::size_t kk = std::min(k, rows.size() - 1);
        std::map<std::size_t, std::vector<std::size_t>> knn;  // lazily filled per drawn row
        for (Eigen::Index i = 0; i < extra.rows(); ++i) {
            const std::size_t x = rows[rng.index(rows.size())];
            auto found = knn.find(x);
            if (found == knn.end()) found = knn.emplace(x, nearest_neighbours(train.matrix, x, rows, kk)).first;
            const std::size_t nn = found->second[rng.index(found->second.size())];
            const double lambda = rng.uniform();
            const auto xr = train.matrix.row(static_cast<Eigen::Index>(x));
            extra.row(i) = xr + lambda * (train.matrix.row(static_cast<Eigen::Index>(nn)) - xr);
        }
        out.append(synthetic_block(std::move(extra), label));
    }
    out.role = features::Role::Augment;
    return out;
}

}  // namespace itgan::resample
