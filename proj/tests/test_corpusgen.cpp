#include "doctest.h"
#include "support.hpp"

#include "itgan/corpusgen.hpp"
#include "itgan/features.hpp"
#include "itgan/forest.hpp"
#include "itgan/hash.hpp"

#include <set>

using namespace itgan;
using namespace itgan::corpusgen;
using logs::EventKind;

namespace {

DayContext context(logs::Date d) {
    DayContext ctx;
    ctx.key = {user_id(3), d};
    ctx.home_pc = "PC-0003";
    ctx.email = "u3@dtaa.com";
    ctx.n_pcs = 10;
    return ctx;
}

bool has_document_or_exe(const logs::LogEvent& ev) {
    static const std::set<std::string> ok{"exe", "bat", "msi", "doc", "docx", "pdf", "txt", "xlsx", "pptx", "zip"};
    return ok.contains(std::get<logs::FilePayload>(ev.payload).extension);
}

}  // namespace

TEST_CASE("single user, single day, no insiders") {
    testing::TempDir dir("one");
    CorpusConfig cfg;
    cfg.n_users = 1;
    cfg.n_days = 1;
    auto gen = generate_corpus(cfg, dir.path());
    REQUIRE(gen.truth.size() == 1);
    CHECK(gen.truth.begin()->second == 0);
    const std::string labels = testing::read_text(dir / "labels.csv");
    CHECK(labels.starts_with("user,date,label\n"));
    CHECK(labels.find("NonMalicious") != std::string::npos);
    auto loaded = features::load_ground_truth(dir / "labels.csv");
    CHECK(loaded == gen.truth);
}

TEST_CASE("identical config and seed give byte-identical corpora") {
    testing::TempDir a("a"), b("b"), c("c");
    generate_corpus(default_config(30, 40, 11), a.path());
    generate_corpus(default_config(30, 40, 11), b.path());
    generate_corpus(default_config(30, 40, 12), c.path());
    for (const char* f : {"logon.csv", "device.csv", "file.csv", "email.csv", "http.csv", "labels.csv"})
        CHECK(hash::sha256_file(a / f) == hash::sha256_file(b / f));
    CHECK(hash::sha256_dir(a.path()) == hash::sha256_dir(b.path()));
    CHECK(hash::sha256_dir(a.path()) != hash::sha256_dir(c.path()));
}

TEST_CASE("default plan hits the malicious fraction at desk scale") {
    testing::TempDir dir("frac");
    auto gen = generate_corpus(default_config(200, 120, 7), dir.path());
    // recount from the emitted labels file
    auto truth = features::load_ground_truth(dir / "labels.csv");
    std::size_t bad = 0;
    for (const auto& [k, v] : truth) bad += v != 0;
    const double frac = static_cast<double>(bad) / static_cast<double>(truth.size());
    CHECK(truth.size() == 200u * 120u);
    CHECK(frac >= 0.008);
    CHECK(frac <= 0.018);
    CHECK(std::abs(frac - kDefaultMaliciousFraction) <= 0.005);
    CHECK(gen.malicious_fraction() == doctest::Approx(frac));
}

TEST_CASE("insider plan respects windows and disjoint users") {
    auto plan = default_insider_plan(200, 120, 0.013, 5);
    std::map<std::size_t, Scenario> owner;
    std::size_t days = 0;
    std::set<Scenario> seen;
    for (const auto& w : plan) {
        CHECK(w.user < 200);
        CHECK(w.start_day + w.length <= 120);
        auto [it, ins] = owner.emplace(w.user, w.scenario);
        CHECK((ins || it->second == w.scenario));
        days += w.length;
        seen.insert(w.scenario);
    }
    CHECK(days == static_cast<std::size_t>(std::llround(0.013 * 200 * 120)));
    CHECK(seen.size() == 3);
}

TEST_CASE("config validation") {
    CorpusConfig cfg;
    cfg.n_users = 2;
    cfg.n_days = 5;
    cfg.insiders = {{Scenario::S1, 2, 0, 1}};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.insiders = {{Scenario::S1, 0, 3, 3}};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.insiders = {{Scenario::S1, 0, 0, 1}, {Scenario::S2, 0, 2, 1}};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.insiders = {{Scenario::S1, 0, 0, 1}, {Scenario::S2, 1, 2, 1}};
    CHECK_NOTHROW(cfg.validate());
    cfg.overlap = -1;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("scenario signatures are always planted") {
    const logs::Date d{2010, 3, 10};
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        auto s1 = plant_scenario({}, Scenario::S1, rng, context(d));
        bool wiki = false, late_logon = false;
        for (const auto& ev : s1) {
            if (ev.kind == EventKind::HttpVisit &&
                std::get<logs::HttpPayload>(ev.payload).url.find("wikileaks.org") != std::string::npos)
                wiki = true;
            if (ev.kind == EventKind::Logon && features::is_after_hours(ev.timestamp)) late_logon = true;
        }
        CHECK(wiki);
        CHECK(late_logon);

        auto s2 = plant_scenario({}, Scenario::S2, rng, context(d));
        std::size_t copies = 0, connects = 0;
        for (const auto& ev : s2) {
            if (ev.kind == EventKind::FileCopy && has_document_or_exe(ev)) ++copies;
            if (ev.kind == EventKind::DeviceConnect) ++connects;
        }
        CHECK(copies >= 2);
        CHECK(connects >= 1);

        auto s3 = plant_scenario({}, Scenario::S3, rng, context(d));
        bool d2_term = false;
        std::set<std::string> pcs;
        for (const auto& ev : s3) {
            if (ev.kind == EventKind::HttpVisit) {
                auto kw = features::extract_keywords(std::get<logs::HttpPayload>(ev.payload).content);
                for (const auto& t : kw) d2_term |= features::default_d2().terms.contains(t);
            }
            if (ev.kind == EventKind::Logon) pcs.insert(ev.pc);
        }
        CHECK(d2_term);
        CHECK(pcs.size() >= 2);
        for (const auto* day : {&s1, &s2, &s3})
            for (const auto& ev : *day) {
                CHECK(ev.timestamp.date == d);
                CHECK(ev.user == user_id(3));
            }
    }
}

TEST_CASE("plant_scenario is deterministic given the generator state") {
    Rng a(9), b(9);
    const auto ctx = context({2010, 3, 10});
    auto x = plant_scenario({}, Scenario::S2, a, ctx);
    auto y = plant_scenario({}, Scenario::S2, b, ctx);
    REQUIRE(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(logs::event_fields(x[i]) == logs::event_fields(y[i]));
}

TEST_CASE("planted signal is learnable by a shallow tree") {
    testing::TempDir dir("sep");
    auto gen = generate_corpus(default_config(60, 60, 4), dir.path());
    auto ds = features::featurize_corpus(dir.path(), gen.truth, features::default_d1(), features::default_d2());
    auto sorted = forest::presort(ds.matrix);
    Rng rng(1);
    std::vector<double> w(ds.rows(), 1.0);
    auto tree = forest::build_gini_tree(ds.matrix, ds.labels, w, sorted, 4, 4, 1, features::kFeatureCount, rng);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        const auto& leaf = tree.leaf_for(ds.matrix.row(static_cast<Eigen::Index>(i)));
        hit += forest::argmax(Eigen::Map<const Eigen::RowVectorXd>(leaf.leaf.data(), 4)) == ds.labels[i];
    }
    CHECK(tree.depth() <= 4);
    CHECK(static_cast<double>(hit) / static_cast<double>(ds.rows()) >= 0.9);
}
