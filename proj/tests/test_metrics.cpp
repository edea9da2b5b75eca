#include "doctest.h"

#include "itgan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace itgan;
using namespace itgan::metrics;

namespace {

ConfusionMatrix binary() { return ConfusionMatrix::from_rows({{50, 10}, {5, 35}}); }

double classical_mcc(double tp, double tn, double fp, double fn) {
    const double den = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
    return den == 0 ? 0.0 : (tp * tn - fp * fn) / den;
}

ConfusionMatrix random_cm(Rng& rng, std::size_t k) {
    std::vector<std::vector<long>> rows(k, std::vector<long>(k));
    for (auto& r : rows)
        for (auto& v : r) v = static_cast<long>(rng.index(30));
    return ConfusionMatrix::from_rows(rows);
}

}  // namespace

TEST_CASE("confusion") {
    auto cm = confusion({0, 1, 2, 3}, {0, 1, 2, 3}, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(cm.counts[i][j] == (i == j ? 1 : 0));
    CHECK_THROWS_AS(confusion({0, 1}, {0}, 2), Error);
    CHECK_THROWS_AS(confusion({0, 5}, {0, 1}, 2), Error);

    Rng rng(2);
    std::vector<int> t, p;
    for (int i = 0; i < 500; ++i) {
        t.push_back(static_cast<int>(rng.index(4)));
        p.push_back(static_cast<int>(rng.index(4)));
    }
    auto c = confusion(t, p, 4);
    CHECK(c.total() == 500);
    for (std::size_t k = 0; k < 4; ++k)
        CHECK(c.row_sum(k) == std::count(t.begin(), t.end(), static_cast<int>(k)));
}

TEST_CASE("hand-computed binary values") {
    auto cm = binary();
    auto m = macro_prf(cm);
    CHECK(m.precision == doctest::Approx((50.0 / 55 + 35.0 / 45) / 2).epsilon(1e-12));
    CHECK(std::abs(m.precision - 0.8434) < 1e-4);
    CHECK(m.recall == doctest::Approx((50.0 / 60 + 35.0 / 40) / 2));
    CHECK(std::abs(kappa(cm) - 0.6939) < 1e-4);
    CHECK(kappa(cm) == doctest::Approx(0.34 / 0.49));
    CHECK(std::abs(mcc(cm) - 0.6975) < 1e-4);
    CHECK(mcc(cm) == doctest::Approx(1700.0 / std::sqrt(45.0 * 40 * 60 * 55)));
}

TEST_CASE("identity and degenerate matrices") {
    auto id = ConfusionMatrix::from_rows({{3, 0, 0}, {0, 4, 0}, {0, 0, 5}});
    auto m = macro_prf(id);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
    CHECK(kappa(id) == 1.0);
    CHECK(mcc(id) == doctest::Approx(1.0));

    auto one_col = ConfusionMatrix::from_rows({{10, 0}, {0, 0}});
    CHECK(kappa(one_col) == 0.0);  // p_e = 1
    auto single_pred = ConfusionMatrix::from_rows({{10, 0}, {7, 0}});
    CHECK(mcc(single_pred) == 0.0);
    CHECK(macro_prf(single_pred).per_class[1].precision == 0.0);

    // class 2 never true and never predicted: excluded from the macro mean
    auto absent = ConfusionMatrix::from_rows({{5, 1, 0}, {2, 4, 0}, {0, 0, 0}});
    auto two = ConfusionMatrix::from_rows({{5, 1}, {2, 4}});
    CHECK(macro_prf(absent).precision == doctest::Approx(macro_prf(two).precision));
    CHECK(macro_prf(absent).f1 == doctest::Approx(macro_prf(two).f1));
}

TEST_CASE("binary R_K equals the classical formula on every small matrix") {
    double worst = 0.0;
    for (long a = 0; a <= 20; ++a)
        for (long b = 0; b <= 20; ++b)
            for (long c = 0; c <= 20; ++c)
                for (long d = 0; d <= 20; ++d) {
                    auto cm = ConfusionMatrix::from_rows({{a, b}, {c, d}});
                    // class 1 positive: tp = d, tn = a, fp = b, fn = c
                    worst = std::max(worst, std::abs(mcc(cm) - classical_mcc(static_cast<double>(d),
                                                                             static_cast<double>(a),
                                                                             static_cast<double>(b),
                                                                             static_cast<double>(c))));
                }
    CHECK(worst <= 1e-12);
}

TEST_CASE("symmetry, asymmetry and permutation properties") {
    Rng rng(5);
    bool asym = false;
    for (int trial = 0; trial < 200; ++trial) {
        auto cm = random_cm(rng, 4);
        CHECK(mcc(cm) == doctest::Approx(mcc(cm.transposed())).epsilon(1e-12));
        asym |= std::abs(macro_prf(cm).precision - macro_prf(cm.transposed()).precision) > 1e-9;
        std::vector<std::size_t> perm{0, 1, 2, 3};
        std::shuffle(perm.begin(), perm.end(), rng.engine());
        ConfusionMatrix pc(4);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) pc.counts[perm[i]][perm[j]] = cm.counts[i][j];
        CHECK(kappa(pc) == doctest::Approx(kappa(cm)).epsilon(1e-12));
        CHECK(mcc(pc) == doctest::Approx(mcc(cm)).epsilon(1e-12));
        auto b = evaluate(cm);
        CHECK(b.kappa <= 1.0);
        CHECK(b.mcc >= -1.0);
        CHECK(b.mcc <= 1.0);
        for (const auto& s : b.per_class) {
            CHECK(s.precision >= 0.0);
            CHECK(s.precision <= 1.0);
            CHECK(s.f1 <= 1.0);
        }
    }
    CHECK(asym);
}

TEST_CASE("evaluate bundles every metric") {
    auto b = evaluate(binary());
    CHECK(b.kappa == doctest::Approx(kappa(binary())));
    CHECK(b.mcc == doctest::Approx(mcc(binary())));
    CHECK(b.f1_macro == doctest::Approx(macro_prf(binary()).f1));
    CHECK(b.per_class.size() == 2);
    const double p0 = 50.0 / 55, r0 = 50.0 / 60;
    CHECK(b.per_class[0].f1 == doctest::Approx(2 * p0 * r0 / (p0 + r0)));
}
