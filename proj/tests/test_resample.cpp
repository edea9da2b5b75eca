#include "doctest.h"
#include "smote_oracle.hpp"

#include "itgan/resample.hpp"

using namespace itgan;
using namespace itgan::resample;

namespace {

features::Dataset counts_dataset(const std::vector<std::size_t>& counts, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> y;
    for (std::size_t c = 0; c < counts.size(); ++c) y.insert(y.end(), counts[c], static_cast<int>(c));
    Matrix x(static_cast<Eigen::Index>(y.size()), 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
    return features::make_dataset(x, y, features::Role::Train);
}

bool row_in(const Matrix& m, const Eigen::RowVectorXd& r, const std::vector<int>& labels, int cls) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        if (labels[static_cast<std::size_t>(i)] == cls && m.row(i) == r) return true;
    return false;
}

}  // namespace

TEST_CASE("ros equalizes with exact copies") {
    auto ds = counts_dataset({10, 2}, 1);
    auto out = ros(ds, {}, 3);
    CHECK(out.class_counts() == std::map<int, std::size_t>{{0, 10}, {1, 10}});
    CHECK(out.matrix.topRows(12) == ds.matrix);
    for (Eigen::Index i = 12; i < out.matrix.rows(); ++i) {
        CHECK(out.labels[static_cast<std::size_t>(i)] == 1);
        CHECK(row_in(ds.matrix, out.matrix.row(i), ds.labels, 1));
        CHECK(out.users[static_cast<std::size_t>(i)] == "synthetic");
    }
    CHECK(ros(ds, {}, 3).matrix == out.matrix);
}

TEST_CASE("ros on balanced data is the identity") {
    auto ds = counts_dataset({5, 5, 5}, 2);
    auto out = ros(ds, {}, 1);
    CHECK(out.matrix == ds.matrix);
    CHECK(out.labels == ds.labels);
}

TEST_CASE("ros multiset membership over a larger draw") {
    auto ds = counts_dataset({200, 7, 13}, 5);
    auto out = ros(ds, {}, 9);
    for (Eigen::Index i = static_cast<Eigen::Index>(ds.rows()); i < out.matrix.rows(); ++i)
        CHECK(row_in(ds.matrix, out.matrix.row(i), ds.labels, out.labels[static_cast<std::size_t>(i)]));
    auto empty_target = counts_dataset({5, 0}, 1);
    CHECK_THROWS_AS(ros(empty_target, Policy{{1, 5}}, 1), Error);
}

TEST_CASE("resolve_policy") {
    auto ds = counts_dataset({10, 3, 4}, 1);
    CHECK(resolve_policy(ds, {}) == Policy{{0, 10}, {1, 10}, {2, 10}});
    CHECK(resolve_policy(ds, Policy{{1, 6}}).at(1) == 6);
}

TEST_CASE("smote midpoint and neighbours") {
    Matrix m(3, 2);
    m << 0, 0, 1, 2, 5, 5;
    auto nn = nearest_neighbours(m, 0, {0, 1, 2}, 1);
    CHECK(nn == std::vector<std::size_t>{1});
    const Eigen::RowVectorXd x = m.row(0), xn = m.row(1);
    const Eigen::RowVectorXd mid = x + 0.5 * (xn - x);
    CHECK(mid(0) == 0.5);
    CHECK(mid(1) == 1.0);
    // equidistant candidates resolve to the lower index
    Matrix t(3, 1);
    t << 0, 1, -1;
    CHECK(nearest_neighbours(t, 0, {0, 1, 2}, 1) == std::vector<std::size_t>{1});
}

TEST_CASE("smote with a single-row class duplicates it") {
    auto ds = counts_dataset({8, 1}, 4);
    auto out = smote(ds, 5, {}, 2);
    CHECK(out.class_counts().at(1) == 8);
    for (Eigen::Index i = 9; i < out.matrix.rows(); ++i) CHECK(out.matrix.row(i) == ds.matrix.row(8));
}

TEST_CASE("smote rejects k = 0") {
    auto ds = counts_dataset({8, 3}, 4);
    CHECK_THROWS_AS(smote(ds, 0, {}, 1), Error);
}

TEST_CASE("smote output stays in the class bounding box and on neighbour segments") {
    auto ds = counts_dataset({100, 9, 3}, 6);  // class 2 forces k down to 2
    auto out = smote(ds, 5, {}, 12);
    CHECK(out.class_counts() == std::map<int, std::size_t>{{0, 100}, {1, 100}, {2, 100}});
    CHECK(out.matrix.topRows(static_cast<Eigen::Index>(ds.rows())) == ds.matrix);
    for (Eigen::Index i = static_cast<Eigen::Index>(ds.rows()); i < out.matrix.rows(); ++i) {
        const int c = out.labels[static_cast<std::size_t>(i)];
        Eigen::RowVectorXd lo = Eigen::RowVectorXd::Constant(2, 1e9), hi = Eigen::RowVectorXd::Constant(2, -1e9);
        for (std::size_t r = 0; r < ds.rows(); ++r)
            if (ds.labels[r] == c) {
                lo = lo.cwiseMin(ds.matrix.row(static_cast<Eigen::Index>(r)));
                hi = hi.cwiseMax(ds.matrix.row(static_cast<Eigen::Index>(r)));
            }
        const Eigen::RowVectorXd p = out.matrix.row(i);
        CHECK((p.array() >= lo.array() - 1e-12).all());
        CHECK((p.array() <= hi.array() + 1e-12).all());
        CHECK(smote_oracle::explained(ds.matrix, ds.labels, c, p, 5));
    }
    CHECK(smote(ds, 5, {}, 12).matrix == out.matrix);
}

TEST_CASE("smote geometry on the three-class toy") {
    auto ds = smote_oracle::toy(3);
    auto out = smote(ds, 5, Policy{{1, 540}, {2, 530}}, 8);
    REQUIRE(out.rows() - ds.rows() == 1000);
    std::size_t ok = 0;
    for (Eigen::Index i = static_cast<Eigen::Index>(ds.rows()); i < out.matrix.rows(); ++i)
        ok += smote_oracle::explained(ds.matrix, ds.labels, out.labels[static_cast<std::size_t>(i)],
                                      out.matrix.row(i), 5);
    CHECK(ok == 1000);
}
