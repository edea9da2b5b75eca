#include "doctest.h"
#include "minilog.hpp"
#include "support.hpp"

#include "itgan/corpusgen.hpp"
#include "itgan/features.hpp"

#include <numeric>
#include <set>

using namespace itgan;
using namespace itgan::features;

namespace {

KeywordCorpus example_d1() { return KeywordCorpus::from_terms("D1", {"job", "career", "hiring", "resume", "interview"}); }

Dataset column(std::vector<double> v) {
    Matrix m(static_cast<Eigen::Index>(v.size()), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = v[i];
    return make_dataset(m, std::vector<int>(v.size(), 0), Role::Train);
}

Dataset labelled(const std::vector<std::size_t>& counts) {
    std::vector<int> y;
    for (std::size_t c = 0; c < counts.size(); ++c) y.insert(y.end(), counts[c], static_cast<int>(c));
    Matrix m(static_cast<Eigen::Index>(y.size()), 2);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        m(i, 0) = static_cast<double>(i);
        m(i, 1) = static_cast<double>(i % 7);
    }
    return make_dataset(m, y, Role::Original);
}

}  // namespace

TEST_CASE("jaccard") {
    TokenSet s{"a", "b"};
    CHECK(jaccard(s, s) == 1.0);
    CHECK(jaccard({"a"}, {"b"}) == 0.0);
    CHECK(jaccard({}, {}) == 0.0);
    CHECK(jaccard({"job", "resume"}, {"job", "career", "hiring", "resume", "interview"}) == doctest::Approx(0.4));
    CHECK(jaccard({}, {"x"}) == 0.0);
}

TEST_CASE("jaccard matches a brute-force set computation") {
    Rng rng(3);
    const std::vector<std::string> alphabet{"a", "b", "c", "d", "e", "f"};
    for (int trial = 0; trial < 200; ++trial) {
        TokenSet x, y;
        for (const auto& t : alphabet) {
            if (rng.bernoulli(0.4)) x.insert(t);
            if (rng.bernoulli(0.4)) y.insert(t);
        }
        std::size_t inter = 0, uni = 0;
        for (const auto& t : alphabet) {
            inter += x.contains(t) && y.contains(t);
            uni += x.contains(t) || y.contains(t);
        }
        const double want = uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
        CHECK(jaccard(x, y) == want);
        CHECK(jaccard(x, y) == jaccard(y, x));
    }
}

TEST_CASE("extract_keywords") {
    CHECK(extract_keywords("Keylogger: crack PASSWORD!") == TokenSet{"keylogger", "crack", "password"});
    CHECK(extract_keywords("").empty());
    CHECK(extract_keywords("job job JOB") == TokenSet{"job"});
    CHECK(extract_keywords("an ox is at the zoo") == TokenSet{"the", "zoo"});
    CHECK(extract_keywords("abc123-def") == TokenSet{"abc123", "def"});
}

TEST_CASE("keyword corpora") {
    CHECK(default_d1().terms.size() == 8);
    CHECK(default_d2().terms.contains("keylogger"));
    auto c = KeywordCorpus::from_terms("X", {" Job ", "job", "", "Resume"});
    CHECK(c.terms == TokenSet{"job", "resume"});
    CHECK_THROWS_AS(KeywordCorpus::from_terms("X", {"", " "}), Error);
    testing::TempDir dir("kw");
    testing::write_text(dir / "d.txt", "alpha\n\nBeta\r\n");
    CHECK(KeywordCorpus::load(dir / "d.txt", "D").terms == TokenSet{"alpha", "beta"});
    CHECK_THROWS_AS(KeywordCorpus::load(dir / "missing.txt", "D"), Error);
}

TEST_CASE("empty day is the zero vector") {
    auto v = extract_features({"U1", {2010, 1, 4}}, {}, default_d1(), default_d2());
    for (double x : v.values) CHECK(x == 0.0);
}

TEST_CASE("mini log reproduces the hand-counted vectors") {
    testing::TempDir dir("mini");
    minilog::write(dir.path());
    auto buckets = logs::scan_corpus(dir.path());
    REQUIRE(buckets.size() == 2);
    auto vecs = extract_all(buckets, example_d1(), default_d2());
    REQUIRE(vecs.size() == 2);
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        CAPTURE(kFeatureNames[j]);
        CHECK(vecs[0].values[j] == doctest::Approx(minilog::kDay1[j]).epsilon(1e-15));
        CHECK(vecs[1].values[j] == doctest::Approx(minilog::kDay2[j]).epsilon(1e-15));
    }
    CHECK(vecs[0].values[H1] == 2.0);
    CHECK(vecs[0].values[W1] == 3.0);
    CHECK(vecs[0].values[H2] == doctest::Approx(0.4));

    auto builtin = extract_all(buckets, default_d1(), default_d2());
    CHECK(builtin[0].values[H2] == doctest::Approx(minilog::kDay1H2BuiltinD1));

    auto ds = featurize_corpus(dir.path(), load_ground_truth(dir / "labels.csv"), example_d1(), default_d2());
    REQUIRE(ds.rows() == 2);
    CHECK(ds.labels == std::vector<int>{0, 1});
    CHECK(ds.users[0] == "U1");
    CHECK(ds.dates[1] == "01/09/2010");
}

TEST_CASE("events from another user-day are rejected") {
    testing::TempDir dir("mix");
    minilog::write(dir.path());
    auto buckets = logs::scan_corpus(dir.path());
    std::vector<logs::LogEvent> mixed;
    for (const auto& [k, evs] : buckets) mixed.insert(mixed.end(), evs.begin(), evs.end());
    CHECK_THROWS_AS(extract_features(buckets.begin()->first, mixed, default_d1(), default_d2()), Error);
}

TEST_CASE("label_days") {
    std::vector<UserDayVector> v(3);
    GroundTruth truth;
    for (int i = 0; i < 3; ++i) {
        v[static_cast<std::size_t>(i)].key = {"U", logs::Date{2010, 1, static_cast<unsigned>(i + 1)}};
        truth[v[static_cast<std::size_t>(i)].key] = i;
    }
    auto ds = label_days(v, truth);
    CHECK(ds.labels == std::vector<int>{0, 1, 2});
    CHECK(ds.role == Role::Original);
    v.push_back(UserDayVector{{"Z", {2010, 2, 1}}, {}, -1});
    CHECK_THROWS_AS(label_days(v, truth), Error);
}

TEST_CASE("generated corpus: invariants, recount and label histogram") {
    testing::TempDir dir("feat");
    auto gen = corpusgen::generate_corpus(corpusgen::default_config(30, 40, 5), dir.path());
    auto buckets = logs::scan_corpus(dir.path());
    for (const auto& [key, events] : buckets) {
        auto v = extract_features(key, events, default_d1(), default_d2());
        const auto& f = v.values;
        CHECK(f[L3] <= f[L1]);
        CHECK(f[U2] <= f[U1]);
        CHECK(f[F2] <= f[F1]);
        CHECK(f[H1] <= f[W1]);
        CHECK(f[H2] >= 0.0);
        CHECK(f[H2] <= 1.0);
        CHECK(f[H3] >= 0.0);
        CHECK(f[H3] <= 1.0);
        // brute-force recount of the plain counters
        std::array<double, kFeatureCount> c{};
        for (const auto& ev : events) {
            using logs::EventKind;
            c[L1] += ev.kind == EventKind::Logon;
            c[L2] += ev.kind == EventKind::Logoff;
            c[U1] += ev.kind == EventKind::DeviceConnect;
            c[U3] += ev.kind == EventKind::DeviceDisconnect;
            c[F1] += ev.kind == EventKind::FileCopy;
            c[E1] += ev.kind == EventKind::EmailSend;
            c[W1] += ev.kind == EventKind::HttpVisit;
        }
        for (auto j : {L1, L2, U1, U3, F1, E1, W1}) CHECK(f[j] == c[j]);
    }
    auto ds = featurize_corpus(dir.path(), gen.truth, default_d1(), default_d2());
    CHECK(ds.rows() == gen.truth.size());
    std::map<int, std::size_t> want;
    for (const auto& [k, lbl] : load_ground_truth(dir / "labels.csv")) ++want[lbl];
    CHECK(ds.class_counts() == want);
}

TEST_CASE("scaler") {
    auto ds = column({0, 5, 10});
    auto sc = fit_scaler(ds);
    auto out = apply_scaler(ds, sc);
    CHECK(out.matrix(0, 0) == 0.0);
    CHECK(out.matrix(1, 0) == 0.5);
    CHECK(out.matrix(2, 0) == 1.0);

    auto constant = column({4, 4});
    auto c = apply_scaler(constant, fit_scaler(constant));
    CHECK(c.matrix(0, 0) == 0.0);
    CHECK(c.matrix(1, 0) == 0.0);

    auto test = apply_scaler(column({12, -3}), sc);
    CHECK(test.matrix(0, 0) == 1.0);
    CHECK(test.matrix(1, 0) == 0.0);

    Dataset empty = make_dataset(Matrix(0, 1), {}, Role::Train);
    CHECK_THROWS_AS(fit_scaler(empty), Error);

    testing::TempDir dir("sc");
    write_scaler_csv(dir / "s.csv", sc);
    CHECK(read_scaler_csv(dir / "s.csv") == sc);
}

TEST_CASE("stratified split rounding") {
    auto one = labelled({100});
    auto s = stratified_split(one, 0.3, 1);
    CHECK(s.train.rows() == 70);
    CHECK(s.test.rows() == 30);

    auto two = labelled({90, 10});
    auto t = stratified_split(two, 0.3, 1);
    CHECK(t.test.class_counts() == std::map<int, std::size_t>{{0, 27}, {1, 3}});
    CHECK(t.train.class_counts() == std::map<int, std::size_t>{{0, 63}, {1, 7}});

    // tiny classes still contribute one test row
    auto tiny = labelled({50, 2});
    CHECK(stratified_split(tiny, 0.1, 2).test.class_counts().at(1) == 1);

    CHECK_THROWS_AS(stratified_split(labelled({10, 1}), 0.3, 1), Error);
    CHECK_THROWS_AS(stratified_split(two, 0.0, 1), Error);
    CHECK_THROWS_AS(stratified_split(two, 1.0, 1), Error);
}

TEST_CASE("split is a deterministic partition") {
    auto ds = labelled({60, 20, 9, 4});
    auto a = stratified_split(ds, 0.3, 17);
    auto b = stratified_split(ds, 0.3, 17);
    auto c = stratified_split(ds, 0.3, 18);
    CHECK(a.train.matrix == b.train.matrix);
    CHECK(a.test.matrix == b.test.matrix);
    CHECK(a.test.matrix != c.test.matrix);
    CHECK(a.train.rows() + a.test.rows() == ds.rows());
    std::set<double> train_ids, test_ids;
    for (Eigen::Index i = 0; i < a.train.matrix.rows(); ++i) train_ids.insert(a.train.matrix(i, 0));
    for (Eigen::Index i = 0; i < a.test.matrix.rows(); ++i) test_ids.insert(a.test.matrix(i, 0));
    for (double id : test_ids) CHECK_FALSE(train_ids.contains(id));
    CHECK(train_ids.size() + test_ids.size() == ds.rows());
    CHECK(a.train.role == Role::Train);
    CHECK(a.test.role == Role::Test);
}

TEST_CASE("features.csv round trip") {
    testing::TempDir dir("csv");
    minilog::write(dir.path());
    auto ds = featurize_corpus(dir.path(), load_ground_truth(dir / "labels.csv"), default_d1(), default_d2());
    write_features_csv(dir / "features.csv", ds);
    const std::string text = testing::read_text(dir / "features.csv");
    CHECK(text.starts_with("user,date,L1,L2,L3,L4,L5,U1,U2,U3,F1,F2,F3,F4,E1,E2,E3,E4,H1,H2,H3,W1,label\n"));
    auto back = read_features_csv(dir / "features.csv");
    CHECK(back.matrix == ds.matrix);
    CHECK(back.labels == ds.labels);
    CHECK(back.users == ds.users);
    CHECK(back.dates == ds.dates);
    testing::write_text(dir / "bad.csv", "user,date,L1\nU1,01/04/2010,1\n");
    CHECK_THROWS_AS(read_features_csv(dir / "bad.csv"), Error);
}

TEST_CASE("dataset helpers") {
    auto ds = labelled({3, 2});
    auto sel = ds.select({4, 0});
    CHECK(sel.labels == std::vector<int>{1, 0});
    CHECK(sel.matrix(0, 0) == 4.0);
    sel.append(ds);
    CHECK(sel.rows() == 7);
    CHECK(feature_index("H2") == H2);
    CHECK_THROWS_AS(feature_index("Q9"), Error);
    CHECK(is_after_hours(logs::DateTime::parse("01/04/2010 07:59:59")));
    CHECK_FALSE(is_after_hours(logs::DateTime::parse("01/04/2010 08:00:00")));
    CHECK(is_after_hours(logs::DateTime::parse("01/04/2010 18:00:00")));
    CHECK(is_executable_extension("EXE"));
    CHECK_FALSE(is_executable_extension("docx"));
}
