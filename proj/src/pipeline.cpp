#include "itgan/pipeline.hpp"

#include "itgan/corpusgen.hpp"
#include "itgan/hash.hpp"
#include "itgan/resample.hpp"
#include "itgan/viz.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace itgan::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// Re-raises any failure tagged with the stage (and cell) it came from.
template <class F>
auto stage(const std::string& tag, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.code(), "[" + tag + "] " + e.what());
    } catch (const std::exception& e) {
        throw Error(ErrorCode::Internal, "[" + tag + "] " + e.what());
    }
}

std::size_t method_id(const std::string& m) {
    static const std::vector<std::string> ids{"real", "ros", "smote", "cgan", "rf", "xgb", "mlp", "cnn1d"};
    return static_cast<std::size_t>(std::find(ids.begin(), ids.end(), m) - ids.begin());
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

std::vector<std::size_t> counts_vector(const features::Dataset& ds, std::size_t k) {
    std::vector<std::size_t> out(k, 0);
    for (int y : ds.labels)
        if (y >= 0 && static_cast<std::size_t>(y) < k) ++out[static_cast<std::size_t>(y)];
    return out;
}

}  // namespace

Augmented build_training_set(const features::Dataset& train, const std::string& method, const AugmentOptions& opt,
                             std::uint64_t seed) {
    Augmented out;
    out.real_rows = train.rows();
    if (method == "real") {
        out.train = train;
    } else if (method == "ros") {
        out.train = resample::ros(train, {}, seed);
    } else if (method == "smote") {
        out.train = resample::smote(train, opt.smote_k, {}, seed);
    } else if (method == "cgan") {
        std::vector<int> minority;
        for (const auto& [c, n] : train.class_counts())
            if (c != 0) minority.push_back(c);
        if (minority.empty()) fail(ErrorCode::InvalidArgument, "no minority class to condition the cgan on");
        cgan::CganConfig cfg;
        cfg.epochs = opt.cgan_epochs;
        cfg.batch_size = opt.cgan_batch;
        cfg.conditioned_classes = minority;
        cfg.seed = seed;
        out.gan = cgan::train_cgan(train, cfg);
        out.train = cgan::augment_dataset(train, *out.gan, cgan::equalize_policy(train, minority), derive_seed(seed, 7));
    } else {
        fail(ErrorCode::InvalidArgument, "unknown augmentation '" + method + "'");
    }
    return out;
}

std::size_t Model::n_classes() const {
    return std::visit([](const auto& m) { return m.n_classes; }, impl);
}

std::size_t Model::n_features() const {
    if (const auto* nn = std::get_if<nnclf::NnModel>(&impl)) return nn->net.input_width();
    if (const auto* rf = std::get_if<forest::RfModel>(&impl)) return rf->n_features;
    return std::get<forest::GbtModel>(impl).n_features;
}

std::vector<int> Model::predict(const Matrix& rows) const {
    if (const auto* rf = std::get_if<forest::RfModel>(&impl)) return forest::predict_rf(*rf, rows);
    if (const auto* gbt = std::get_if<forest::GbtModel>(&impl)) return forest::predict_gbt(*gbt, rows);
    return nnclf::predict_nn(std::get<nnclf::NnModel>(impl), rows);
}

void Model::save(const std::string& path) const {
    if (const auto* rf = std::get_if<forest::RfModel>(&impl)) return forest::save_rf(*rf, path);
    if (const auto* gbt = std::get_if<forest::GbtModel>(&impl)) return forest::save_gbt(*gbt, path);
    nnclf::save_nn(std::get<nnclf::NnModel>(impl), path);
}

Model Model::load(const std::string& path) {
    const std::string kind = nn::peek_container_kind(path);
    Model m;
    m.kind = kind;
    if (kind == "rf") m.impl = forest::load_rf(path);
    else if (kind == "xgb") m.impl = forest::load_gbt(path);
    else if (kind == "mlp" || kind == "cnn1d") m.impl = nnclf::load_nn(path);
    else fail(ErrorCode::Parse, path + " holds a '" + kind + "' container, not a classifier");
    return m;
}

Model train_model(const features::Dataset& train, const std::string& kind, const ModelOptions& opt,
                  std::size_t n_classes, std::uint64_t seed) {
    Model m;
    m.kind = kind;
    if (kind == "rf") {
        forest::RfParams p;
        p.n_trees = opt.rf_trees;
        p.seed = seed;
        p.threads = opt.threads;
        m.impl = forest::train_rf(train, p, n_classes);
    } else if (kind == "xgb") {
        forest::GbtParams p;
        p.rounds = opt.xgb_rounds;
        p.max_depth = opt.xgb_depth;
        p.seed = seed;
        m.impl = forest::train_gbt(train, p, n_classes);
    } else if (kind == "mlp") {
        nnclf::MlpParams p;
        p.epochs = opt.nn_epochs;
        p.batch = opt.nn_batch;
        p.lr = opt.nn_lr;
        p.seed = seed;
        m.impl = nnclf::train_mlp(train, p, n_classes);
    } else if (kind == "cnn1d") {
        nnclf::CnnParams p;
        p.epochs = opt.nn_epochs;
        p.batch = opt.nn_batch;
        p.lr = opt.nn_lr;
        p.seed = seed;
        m.impl = nnclf::train_cnn1d(train, p, n_classes);
    } else {
        fail(ErrorCode::InvalidArgument, "unknown model '" + kind + "'");
    }
    return m;
}

EvalReport without_timing(EvalReport r) {
    r.total_seconds = 0.0;
    for (auto& c : r.cells) c.timing = {};
    return r;
}

// ---- JSON ----

namespace {

json metrics_json(const metrics::MetricsBundle& m) {
    json per = json::array();
    for (const auto& c : m.per_class) per.push_back({{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}});
    return {{"precision_macro", m.precision_macro}, {"recall_macro", m.recall_macro}, {"f1_macro", m.f1_macro},
            {"kappa", m.kappa}, {"mcc", m.mcc}, {"per_class", per}};
}

metrics::MetricsBundle metrics_from(const json& j) {
    metrics::MetricsBundle m;
    m.precision_macro = j.at("precision_macro").get<double>();
    m.recall_macro = j.at("recall_macro").get<double>();
    m.f1_macro = j.at("f1_macro").get<double>();
    m.kappa = j.at("kappa").get<double>();
    m.mcc = j.at("mcc").get<double>();
    for (const auto& c : j.at("per_class"))
        m.per_class.push_back({c.at("precision").get<double>(), c.at("recall").get<double>(), c.at("f1").get<double>()});
    return m;
}

}  // namespace

std::string to_json(const EvalReport& r) {
    json cells = json::array();
    for (const auto& c : r.cells) {
        cells.push_back({{"task", c.task},
                         {"augmentation", c.augmentation},
                         {"model", c.model},
                         {"classes", c.classes},
                         {"seed", c.seed},
                         {"train_rows", c.train_rows},
                         {"train_class_counts", c.train_class_counts},
                         {"test_hash", c.test_hash},
                         {"metrics", metrics_json(c.metrics)},
                         {"confusion", c.confusion.counts},
                         {"timing",
                          {{"augment_seconds", c.timing.augment_seconds},
                           {"train_seconds", c.timing.train_seconds},
                           {"eval_seconds", c.timing.eval_seconds}}}});
    }
    json j = {{"schema", r.schema},
              {"provenance",
               {{"seed", r.seed}, {"mode", r.mode}, {"config", r.config}, {"config_hash", r.config_hash},
                {"corpus_hash", r.corpus_hash}}},
              {"data",
               {{"user_days", r.user_days}, {"class_counts", r.class_counts}, {"train_rows", r.train_rows},
                {"test_rows", r.test_rows}, {"test_hashes", r.test_hashes}}},
              {"cells", cells},
              {"viz", r.viz},
              {"timing", {{"total_seconds", r.total_seconds}}}};
    return j.dump(2) + "\n";
}

EvalReport from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        EvalReport r;
        r.schema = j.at("schema").get<std::string>();
        if (r.schema != "itgan-report/1") fail(ErrorCode::Parse, "unsupported report schema '" + r.schema + "'");
        const auto& p = j.at("provenance");
        r.seed = p.at("seed").get<std::uint64_t>();
        r.mode = p.at("mode").get<std::string>();
        r.config = p.at("config").get<config::KeyValues>();
        r.config_hash = p.at("config_hash").get<std::string>();
        r.corpus_hash = p.at("corpus_hash").get<std::string>();
        const auto& d = j.at("data");
        r.user_days = d.at("user_days").get<std::size_t>();
        r.class_counts = d.at("class_counts").get<std::vector<std::size_t>>();
        r.train_rows = d.at("train_rows").get<std::size_t>();
        r.test_rows = d.at("test_rows").get<std::size_t>();
        r.test_hashes = d.at("test_hashes").get<std::map<std::string, std::string>>();
        for (const auto& c : j.at("cells")) {
            Cell cell;
            cell.task = c.at("task").get<std::string>();
            cell.augmentation = c.at("augmentation").get<std::string>();
            cell.model = c.at("model").get<std::string>();
            cell.classes = c.at("classes").get<std::vector<std::string>>();
            cell.seed = c.at("seed").get<std::uint64_t>();
            cell.train_rows = c.at("train_rows").get<std::size_t>();
            cell.train_class_counts = c.at("train_class_counts").get<std::vector<std::size_t>>();
            cell.test_hash = c.at("test_hash").get<std::string>();
            cell.metrics = metrics_from(c.at("metrics"));
            cell.confusion = metrics::ConfusionMatrix::from_rows(c.at("confusion").get<std::vector<std::vector<long>>>());
            const auto& t = c.at("timing");
            cell.timing = {t.at("augment_seconds").get<double>(), t.at("train_seconds").get<double>(),
                           t.at("eval_seconds").get<double>()};
            r.cells.push_back(std::move(cell));
        }
        r.viz = j.at("viz").get<std::vector<std::string>>();
        r.total_seconds = j.at("timing").at("total_seconds").get<double>();
        return r;
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, std::string("malformed report: ") + e.what());
    }
}

std::string to_markdown(const EvalReport& r) {
    auto f = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", v);
        return std::string(buf);
    };
    std::ostringstream md;
    md << "# Insider-threat augmentation grid\n\n"
       << "- mode: " << r.mode << "\n- seed: " << r.seed << "\n- user-days: " << r.user_days << " (train "
       << r.train_rows << ", test " << r.test_rows << ")\n- config sha256: `" << r.config_hash
       << "`\n- corpus sha256: `" << r.corpus_hash << "`\n\n"
       << "| Task | Augmentation | Model | Precision | Recall | F-score | Kappa | MCC |\n"
       << "|---|---|---|---|---|---|---|---|\n";
    for (const auto& c : r.cells)
        md << "| " << c.task << " | " << c.augmentation << " | " << c.model << " | " << f(c.metrics.precision_macro)
           << " | " << f(c.metrics.recall_macro) << " | " << f(c.metrics.f1_macro) << " | " << f(c.metrics.kappa)
           << " | " << f(c.metrics.mcc) << " |\n";
    if (!r.viz.empty()) {
        md << "\n## Diagnostics\n\n";
        for (const auto& v : r.viz) md << "- [" << v << "](" << v << ")\n";
    }
    return md.str();
}

void emit_report(const EvalReport& r, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + dir + ": " + ec.message());
    write_text(fs::path(dir) / "report.json", to_json(r));
    write_text(fs::path(dir) / "report.md", to_markdown(r));
}

// ---- diagnostics bundle ----

std::vector<std::string> write_viz_bundle(const features::Dataset& real, const features::Dataset* synthetic,
                                          const std::string& dir, const VizOptions& opt) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + dir + ": " + ec.message());

    struct Group {
        std::string name;
        std::vector<std::size_t> rows;
        const features::Dataset* ds;
    };
    std::vector<Group> groups;
    if (synthetic) {
        Group r{"real", {}, &real}, s{"synthetic", {}, synthetic};
        for (std::size_t i = 0; i < real.rows(); ++i)
            if (real.labels[i] != 0) r.rows.push_back(i);
        s.rows.resize(synthetic->rows());
        std::iota(s.rows.begin(), s.rows.end(), 0);
        groups = {r, s};
    } else {
        for (const auto& [c, n] : real.class_counts()) {
            Group g{std::string(label_name(c)), {}, &real};
            for (std::size_t i = 0; i < real.rows(); ++i)
                if (real.labels[i] == c) g.rows.push_back(i);
            groups.push_back(std::move(g));
        }
    }
    std::erase_if(groups, [](const Group& g) { return g.rows.empty(); });
    if (groups.empty()) fail(ErrorCode::InvalidArgument, "no rows to visualise");

    std::vector<std::string> written;
    const fs::path base(dir);
    for (const char* feat : {"L1", "L5"}) {
        const auto f = static_cast<Eigen::Index>(features::feature_index(feat));
        std::vector<viz::Series> series;
        for (const auto& g : groups) {
            std::vector<double> v;
            for (std::size_t i : g.rows) v.push_back(g.ds->matrix(static_cast<Eigen::Index>(i), f));
            const auto curve = viz::kde_curve(v);
            series.push_back({g.name, curve.grid, curve.density});
        }
        const auto path = (base / (std::string("kde_") + feat + ".svg")).string();
        viz::export_plot(series, viz::PlotKind::Kde, path, std::string("KDE of ") + feat);
        written.push_back(path);
    }

    // shared subsample for the scatter plots
    Rng rng(opt.seed);
    const std::size_t per_group = std::max<std::size_t>(2, opt.tsne_points / groups.size());
    std::vector<std::pair<std::size_t, std::size_t>> picks;  // (group, row)
    for (std::size_t g = 0; g < groups.size(); ++g) {
        auto rows = groups[g].rows;
        std::shuffle(rows.begin(), rows.end(), rng.engine());
        rows.resize(std::min(rows.size(), per_group));
        std::sort(rows.begin(), rows.end());
        for (std::size_t r : rows) picks.emplace_back(g, r);
    }
    Matrix sample(static_cast<Eigen::Index>(picks.size()), real.matrix.cols());
    for (std::size_t i = 0; i < picks.size(); ++i)
        sample.row(static_cast<Eigen::Index>(i)) =
            groups[picks[i].first].ds->matrix.row(static_cast<Eigen::Index>(picks[i].second));

    auto scatter = [&](const Matrix& xy, const std::string& file, const std::string& title) {
        std::vector<viz::Series> series;
        for (const auto& g : groups) series.push_back({g.name, {}, {}});
        for (std::size_t i = 0; i < picks.size(); ++i) {
            series[picks[i].first].x.push_back(xy(static_cast<Eigen::Index>(i), 0));
            series[picks[i].first].y.push_back(xy(static_cast<Eigen::Index>(i), 1));
        }
        const auto path = (base / file).string();
        viz::export_plot(series, viz::PlotKind::Scatter, path, title);
        written.push_back(path);
    };
    if (picks.size() >= 2) scatter(viz::pca_project(sample, 2).projected, "pca.svg", "PCA projection");
    if (picks.size() >= 4) {
        viz::TsneParams tp;
        tp.iterations = opt.tsne_iters;
        tp.seed = opt.seed;
        tp.exaggeration_until = std::min(tp.exaggeration_until, opt.tsne_iters / 2);
        tp.momentum_switch = tp.exaggeration_until;
        scatter(viz::tsne_embed(sample, tp).embedding, "tsne.svg", "t-SNE embedding");
    }
    return written;
}

// ---- the grid ----

EvalReport run_pipeline(const config::RunConfig& cfg) {
    const auto started = Clock::now();
    stage("config", [&] { cfg.validate(); });
    EvalReport report;
    report.seed = cfg.seed;
    report.mode = config::mode_name(cfg.mode);
    report.config = config::canonical(cfg);
    report.config_hash = hash::sha256(config::to_text(report.config));

    const fs::path out(cfg.out);
    stage("output", [&] {
        std::error_code ec;
        fs::create_directories(out, ec);
        if (ec) fail(ErrorCode::Io, "cannot create " + out.string() + ": " + ec.message());
    });

    // corpus
    fs::path corpus_dir = cfg.corpus;
    stage("corpus", [&] {
        if (corpus_dir.empty()) {
            corpus_dir = out / "corpus";
            auto cc = corpusgen::default_config(cfg.users, cfg.days, derive_seed(cfg.seed, 1), cfg.malicious_fraction);
            cc.overlap = cfg.overlap;
            corpusgen::generate_corpus(cc, corpus_dir);
        }
        report.corpus_hash = hash::sha256_dir(corpus_dir);
    });

    // featurize
    const features::Dataset all = stage("featurize", [&] {
        const auto d1 = cfg.d1.empty() ? features::default_d1() : features::KeywordCorpus::load(cfg.d1, "D1");
        const auto d2 = cfg.d2.empty() ? features::default_d2() : features::KeywordCorpus::load(cfg.d2, "D2");
        auto ds = features::featurize_corpus(corpus_dir, features::load_ground_truth(corpus_dir / "labels.csv"), d1, d2);
        features::write_features_csv(out / "features.csv", ds);
        return ds;
    });
    report.user_days = all.rows();
    report.class_counts = counts_vector(all, kNumClasses);

    // split and scale (fit on train only)
    features::Dataset train, test;
    stage("split", [&] {
        auto split = features::stratified_split(all, cfg.test_frac, derive_seed(cfg.seed, 2));
        const auto scaler = features::fit_scaler(split.train);
        train = features::apply_scaler(split.train, scaler);
        test = features::apply_scaler(split.test, scaler);
        if (!(features::fit_scaler(split.train) == scaler) || !test.scaler || !(*test.scaler == scaler))
            fail(ErrorCode::Internal, "scaler parameters do not match a refit on the train split");
        features::write_scaler_csv(out / "scaler.csv", scaler);
    });
    report.train_rows = train.rows();
    report.test_rows = test.rows();

    struct Task {
        std::string name;
        std::size_t id;
        int positive;  // 0 = multiclass
    };
    std::vector<Task> tasks;
    if (cfg.mode == config::TaskMode::Multiclass) tasks.push_back({"multiclass", 0, 0});
    else
        for (int c = 1; c < kNumClasses; ++c) tasks.push_back({std::string(label_name(c)), static_cast<std::size_t>(c), c});

    ModelOptions mopt{cfg.rf_trees, cfg.xgb_rounds, cfg.xgb_depth, cfg.nn_epochs, cfg.nn_batch, cfg.nn_lr, cfg.threads};
    AugmentOptions aopt{cfg.smote_k, cfg.cgan_epochs, cfg.cgan_batch};

    bool viz_done = !cfg.viz;
    for (const auto& task : tasks) {
        auto relabel = [&](features::Dataset ds) {
            if (task.positive)
                for (int& y : ds.labels) y = y == task.positive ? 1 : 0;
            return ds;
        };
        const features::Dataset task_train = relabel(train);
        const features::Dataset task_test = relabel(test);
        const std::size_t k = task.positive ? 2 : static_cast<std::size_t>(kNumClasses);
        std::vector<std::string> class_names;
        if (task.positive) class_names = {"rest", task.name};
        else
            for (int c = 0; c < kNumClasses; ++c) class_names.emplace_back(label_name(c));
        const std::string test_hash = hash::sha256_dataset(task_test);
        report.test_hashes[task.name] = test_hash;

        for (const auto& aug : cfg.augmentations) {
            const std::string aug_tag = "augment " + aug + " | " + task.name;
            const auto t_aug = Clock::now();
            const Augmented built = stage(aug_tag, [&] {
                return build_training_set(task_train, aug, aopt, derive_seed(cfg.seed, 100 + task.id * 10 + method_id(aug)));
            });
            const double aug_seconds = since(t_aug);

            if (!viz_done && aug == "cgan") {
                stage("viz | " + task.name, [&] {
                    const auto synth = built.train.select([&] {
                        std::vector<std::size_t> idx(built.train.rows() - built.real_rows);
                        std::iota(idx.begin(), idx.end(), built.real_rows);
                        return idx;
                    }());
                    for (const auto& p : write_viz_bundle(task_train, &synth, (out / "viz").string(),
                                                          {cfg.tsne_points, cfg.tsne_iters, derive_seed(cfg.seed, 3)}))
                        report.viz.push_back(fs::relative(p, out).generic_string());
                });
                viz_done = true;
            }

            for (const auto& model : cfg.models) {
                const std::string tag = model + " | " + aug + " | " + task.name;
                Cell cell;
                cell.task = task.name;
                cell.augmentation = aug;
                cell.model = model;
                cell.classes = class_names;
                cell.seed = derive_seed(cfg.seed, 1000 + task.id * 100 + method_id(aug) * 10 + method_id(model));
                cell.train_rows = built.train.rows();
                cell.train_class_counts = counts_vector(built.train, k);
                cell.timing.augment_seconds = aug_seconds;

                const auto t_train = Clock::now();
                const Model m = stage("train " + tag, [&] { return train_model(built.train, model, mopt, k, cell.seed); });
                cell.timing.train_seconds = since(t_train);

                const auto t_eval = Clock::now();
                stage("eval " + tag, [&] {
                    cell.test_hash = hash::sha256_dataset(task_test);
                    if (cell.test_hash != test_hash) fail(ErrorCode::Internal, "test split changed between grid cells");
                    cell.confusion = metrics::confusion(task_test.labels, m.predict(task_test.matrix), k);
                    cell.metrics = metrics::evaluate(cell.confusion);
                });
                cell.timing.eval_seconds = since(t_eval);
                report.cells.push_back(std::move(cell));
            }
        }
    }

    if (!viz_done)  // no cgan in the grid: class-wise diagnostics of the training split
        stage("viz", [&] {
            for (const auto& p : write_viz_bundle(train, nullptr, (out / "viz").string(),
                                                  {cfg.tsne_points, cfg.tsne_iters, derive_seed(cfg.seed, 3)}))
                report.viz.push_back(fs::relative(p, out).generic_string());
        });

    report.total_seconds = since(started);
    return report;
}

}  // namespace itgan::pipeline
