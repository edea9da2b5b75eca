#pragma once

#include "itgan/features.hpp"

#include <map>

namespace itgan::resample {

// Per-class target counts; empty means "equalize every class to the majority".
using Policy = std::map<int, std::size_t>;

Policy resolve_policy(const features::Dataset& train, const Policy& policy);

// Random oversampling: appends uniformly drawn copies of existing rows.
features::Dataset ros(const features::Dataset& train, const Policy& policy, std::uint64_t seed);

// SMOTE: appends x + lambda * (x_nn - x) for a random class row x and one of
// its k nearest same-class neighbours.  k is lowered to class_size - 1 for
// small classes; single-row classes fall back to duplication.
features::Dataset smote(const features::Dataset& train, std::size_t k, const Policy& policy, std::uint64_t seed);

// Exact k nearest neighbours (Euclidean, ties to the lower row index) of
// `row` among `candidates`, excluding the row itself.
std::vector<std::size_t> nearest_neighbours(const Matrix& data, std::size_t row,
                                            const std::vector<std::size_t>& candidates, std::size_t k);

}  // namespace itgan::resample
