#include "doctest.h"
#include "support.hpp"

#include "itgan/hash.hpp"
#include "itgan/pipeline.hpp"
#include "itgan/viz.hpp"

#include <cmath>
#include <json.hpp>
#include <set>
#include <sstream>

using namespace itgan;
using namespace itgan::config;
using namespace itgan::pipeline;

namespace {

RunConfig small(const std::filesystem::path& out) {
    RunConfig c;
    c.users = 60;
    c.days = 60;
    c.out = out.string();
    c.seed = 3;
    c.cgan_epochs = 10;
    c.rf_trees = 10;
    c.xgb_rounds = 5;
    c.nn_epochs = 3;
    c.tsne_points = 80;
    c.tsne_iters = 100;
    return c;
}

bool all_finite(const metrics::MetricsBundle& m) {
    return std::isfinite(m.precision_macro) && std::isfinite(m.recall_macro) && std::isfinite(m.f1_macro) &&
           std::isfinite(m.kappa) && std::isfinite(m.mcc);
}

}  // namespace

TEST_CASE("sha256 known vectors") {
    CHECK(hash::sha256("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(hash::sha256("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    testing::TempDir dir("hash");
    testing::write_text(dir / "a.txt", "abc");
    CHECK(hash::sha256_file(dir / "a.txt") == hash::sha256("abc"));
    const auto before = hash::sha256_dir(dir.path());
    testing::write_text(dir / "b.txt", "");
    CHECK(hash::sha256_dir(dir.path()) != before);
    auto ds = features::make_dataset(Matrix::Ones(2, 2), {0, 1}, features::Role::Test);
    auto other = ds;
    other.labels[1] = 0;
    CHECK(hash::sha256_dataset(ds) == hash::sha256_dataset(ds.select({0, 1})));
    CHECK(hash::sha256_dataset(ds) != hash::sha256_dataset(other));
}

TEST_CASE("kv parsing") {
    auto kv = parse_kv(
        "# run\n"
        "users = 50\n"
        "out = \"a dir\"  # trailing\n"
        "models = [\"rf\", \"mlp\"]\n"
        "viz = false\n");
    CHECK(kv.at("users") == "50");
    CHECK(kv.at("out") == "a dir");
    CHECK(kv.at("models") == "rf,mlp");
    CHECK(kv.at("viz") == "false");
    CHECK_THROWS_AS(parse_kv("users = 1\nusers = 2\n"), Error);
    CHECK_THROWS_AS(parse_kv("[table]\n"), Error);
    try {
        parse_kv("a = 1\nnonsense\n", "run.toml");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("run.toml:2") != std::string::npos);
    }
}

TEST_CASE("apply, validate and canonical form") {
    auto c = config::apply(RunConfig{}, parse_kv("users = 10\nmodels = [\"xgb\"]\nmode = \"binary-per-scenario\"\nnn-lr = 0.01\n"));
    CHECK(c.users == 10);
    CHECK(c.models == std::vector<std::string>{"xgb"});
    CHECK(c.mode == TaskMode::BinaryPerScenario);
    CHECK(c.nn_lr == 0.01);
    CHECK_THROWS_AS(config::apply(RunConfig{}, {{"bogus", "1"}}), Error);
    CHECK_THROWS_AS(config::apply(RunConfig{}, {{"users", "ten"}}), Error);
    CHECK_THROWS_AS(config::apply(RunConfig{}, {{"models", "rf,svm"}}).validate(), Error);
    CHECK_THROWS_AS(config::apply(RunConfig{}, {{"augmentations", ""}}).validate(), Error);

    // every known key round-trips through its canonical text
    auto canon = canonical(c);
    CHECK_FALSE(canon.contains("out"));
    CHECK_FALSE(canon.contains("threads"));
    auto again = config::apply(RunConfig{}, parse_kv(to_text(canon)));
    CHECK(canonical(again) == canon);
    for (const auto& k : known_keys())
        if (std::string(k.key) != "out" && std::string(k.key) != "threads") CHECK(canon.contains(k.key));
}

TEST_CASE("grid of one cell and binary mode") {
    testing::TempDir dir("pipe1");
    auto cfg = small(dir.path());
    cfg.augmentations = {"real"};
    cfg.models = {"rf"};
    cfg.viz = false;
    set_warnings_enabled(false);
    auto r = run_pipeline(cfg);
    CHECK(r.cells.size() == 1);
    CHECK(r.mode == "multiclass");
    CHECK(r.cells[0].classes.size() == 4);
    CHECK(r.train_rows + r.test_rows == r.user_days);

    cfg.mode = TaskMode::BinaryPerScenario;
    cfg.augmentations = {"real", "smote"};
    auto b = run_pipeline(cfg);
    set_warnings_enabled(true);
    CHECK(b.cells.size() == 3 * 2);
    std::set<std::string> tasks;
    for (const auto& c : b.cells) {
        tasks.insert(c.task);
        CHECK(c.classes.size() == 2);
        CHECK(c.confusion.k == 2);
        CHECK(all_finite(c.metrics));
    }
    CHECK(tasks == std::set<std::string>{"S1", "S2", "S3"});
    CHECK(b.test_hashes.size() == 3);
}

TEST_CASE("full grid: cells, hygiene, determinism, emitted files") {
    testing::TempDir a("pipeA"), b("pipeB");
    set_warnings_enabled(false);
    auto ra = run_pipeline(small(a.path()));
    auto rb = run_pipeline(small(b.path()));
    set_warnings_enabled(true);
    REQUIRE(ra.cells.size() == 16);
    std::set<std::string> hashes;
    for (const auto& c : ra.cells) {
        hashes.insert(c.test_hash);
        CHECK(all_finite(c.metrics));
        CHECK(c.confusion.total() == static_cast<long>(ra.test_rows));
    }
    CHECK(hashes.size() == 1);
    CHECK(*hashes.begin() == ra.test_hashes.at("multiclass"));
    CHECK(without_timing(ra) == without_timing(rb));

    // scaler was fitted on the train split only
    auto train_rows = ra.train_rows;
    auto features = features::read_features_csv(a / "features.csv");
    CHECK(features.rows() == ra.user_days);
    CHECK(train_rows < features.rows());

    emit_report(ra, a.path().string());
    const auto json_text = testing::read_text(a / "report.json");
    auto parsed = nlohmann::json::parse(json_text);
    CHECK(parsed["schema"] == "itgan-report/1");
    CHECK(parsed["cells"].size() == 16);
    CHECK(from_json(json_text) == ra);
    CHECK(from_json(to_json(ra)) == ra);

    const auto md = testing::read_text(a / "report.md");
    std::size_t rows = 0;
    std::istringstream lines(md);
    for (std::string line; std::getline(lines, line);)
        if (line.starts_with("| ") && !line.starts_with("| Task") && !line.starts_with("|--")) ++rows;
    CHECK(rows == 16);

    std::size_t svgs = 0;
    for (const auto& e : std::filesystem::recursive_directory_iterator(a.path()))
        if (e.path().extension() == ".svg") {
            ++svgs;
            CHECK(std::filesystem::exists(viz::csv_sidecar_path(e.path().string())));
        }
    CHECK(svgs >= 4);
    CHECK(ra.viz.size() >= 4);
    CHECK(ra.config_hash == hash::sha256(to_text(canonical(small(a.path())))));
}

TEST_CASE("stage errors name the stage") {
    testing::TempDir dir("pipeErr");
    auto cfg = small(dir.path());
    cfg.corpus = (dir / "missing").string();
    try {
        run_pipeline(cfg);
        FAIL("expected failure");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("[") != std::string::npos);
    }
}

TEST_CASE("models through the common wrapper") {
    Rng rng(1);
    Matrix x(40, 20);
    std::vector<int> y;
    for (Eigen::Index i = 0; i < 40; ++i) {
        for (Eigen::Index j = 0; j < 20; ++j) x(i, j) = rng.uniform();
        y.push_back(static_cast<int>(i % 2));
        x(i, 0) = y.back();
    }
    auto ds = features::make_dataset(x, y, features::Role::Train);
    testing::TempDir dir("models");
    ModelOptions opt;
    opt.rf_trees = 5;
    opt.xgb_rounds = 3;
    opt.nn_epochs = 2;
    for (const char* kind : {"rf", "xgb", "mlp", "cnn1d"}) {
        auto m = train_model(ds, kind, opt, 4, 5);
        CHECK(m.kind == kind);
        CHECK(m.n_classes() == 4);
        CHECK(m.n_features() == 20);
        const auto path = (dir / (std::string(kind) + ".bin")).string();
        m.save(path);
        auto back = Model::load(path);
        CHECK(back.kind == kind);
        CHECK(back.predict(x) == m.predict(x));
    }
    CHECK_THROWS_AS(train_model(ds, "svm", opt, 4, 5), Error);
}

TEST_CASE("training-set builder") {
    Rng rng(2);
    Matrix x(60, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
    std::vector<int> y(48, 0);
    y.insert(y.end(), {1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3});
    auto ds = features::make_dataset(x, y, features::Role::Train);
    AugmentOptions opt;
    opt.cgan_epochs = 2;
    for (const char* m : {"real", "ros", "smote", "cgan"}) {
        auto a = build_training_set(ds, m, opt, 4);
        CHECK(a.real_rows == 60);
        CHECK(a.train.matrix.topRows(60) == ds.matrix);
        if (std::string(m) == "real") CHECK(a.train.rows() == 60);
        else CHECK(a.train.class_counts() == std::map<int, std::size_t>{{0, 48}, {1, 48}, {2, 48}, {3, 48}});
        CHECK(a.gan.has_value() == (std::string(m) == "cgan"));
    }
    CHECK_THROWS_AS(build_training_set(ds, "gan", opt, 4), Error);
}
