// Command-line front end.  Talks to the library only through itgan.h.
#include "itgan/itgan.h"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Failure {
    int code;
};

void check(itgan_status s, const char* what) {
    if (s == ITGAN_OK) return;
    std::fprintf(stderr, "itgan: %s failed (%s): %s\n", what, itgan_status_name(s), itgan_last_error());
    throw Failure{static_cast<int>(s)};
}

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using DatasetPtr = std::unique_ptr<itgan_dataset, Deleter<itgan_dataset, itgan_dataset_free>>;
using ModelPtr = std::unique_ptr<itgan_model, Deleter<itgan_model, itgan_model_free>>;
using ReportPtr = std::unique_ptr<itgan_report, Deleter<itgan_report, itgan_report_free>>;

struct OwnedString {
    char* p = nullptr;
    ~OwnedString() { itgan_string_free(p); }
};

DatasetPtr read_dataset(const std::string& path) {
    itgan_dataset* ds = nullptr;
    check(itgan_dataset_read_csv(path.c_str(), &ds), ("reading " + path).c_str());
    return DatasetPtr(ds);
}

int parse_class(const std::string& s) {
    if (s == "S1" || s == "1") return 1;
    if (s == "S2" || s == "2") return 2;
    if (s == "S3" || s == "3") return 3;
    std::fprintf(stderr, "itgan: --positive expects S1, S2 or S3, got '%s'\n", s.c_str());
    throw Failure{1};
}

std::string kv_lines(const std::map<std::string, std::string>& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = \"" + v + "\"\n";
    return out;
}

std::vector<std::pair<std::string, std::string>> config_keys() {
    OwnedString s;
    check(itgan_config_keys(&s.p), "listing config keys");
    std::vector<std::pair<std::string, std::string>> keys;
    std::istringstream in(s.p);
    std::string line;
    while (std::getline(in, line)) {
        const auto tab = line.find('\t');
        keys.emplace_back(line.substr(0, tab), tab == std::string::npos ? "" : line.substr(tab + 1));
    }
    return keys;
}

void print_metrics(const itgan_metrics& m) {
    std::printf("precision_macro %.6f\nrecall_macro    %.6f\nf1_macro        %.6f\nkappa           %.6f\nmcc             %.6f\n",
                m.precision_macro, m.recall_macro, m.f1_macro, m.kappa, m.mcc);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Insider-threat detection with CGAN-based minority augmentation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(itgan_version()));
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "silence warnings");

    // gen-corpus
    itgan_corpus_spec spec;
    itgan_corpus_spec_default(&spec);
    std::string corpus_out;
    auto* gen = app.add_subcommand("gen-corpus", "generate a synthetic CERT-like log corpus");
    gen->add_option("--out", corpus_out, "output directory")->required();
    gen->add_option("--users", spec.users, "user count")->capture_default_str();
    gen->add_option("--days", spec.days, "day count")->capture_default_str();
    gen->add_option("--seed", spec.seed, "seed")->capture_default_str();
    gen->add_option("--malicious-fraction", spec.malicious_fraction, "malicious user-day fraction")->capture_default_str();
    gen->add_option("--overlap", spec.overlap, "benign lookalike strength")->capture_default_str();

    // featurize
    std::string feat_corpus, feat_out, d1, d2;
    auto* feat = app.add_subcommand("featurize", "turn a corpus into daily feature vectors");
    feat->add_option("--corpus", feat_corpus, "corpus directory with labels.csv")->required();
    feat->add_option("--out", feat_out, "features CSV to write")->required();
    feat->add_option("--d1", d1, "job-hunting keyword file");
    feat->add_option("--d2", d2, "hacking keyword file");

    // split
    std::string split_in, split_dir;
    double test_frac = 0.3;
    std::uint64_t split_seed = 1;
    bool no_scale = false;
    auto* split = app.add_subcommand("split", "stratified train/test split with a train-fitted scaler");
    split->add_option("--features", split_in, "features CSV")->required();
    split->add_option("--out-dir", split_dir, "writes train.csv, test.csv, scaler.csv")->required();
    split->add_option("--test-frac", test_frac, "test fraction")->capture_default_str();
    split->add_option("--seed", split_seed, "seed")->capture_default_str();
    split->add_flag("--no-scale", no_scale, "keep raw feature values");

    // augment
    std::string aug_in, aug_out, aug_method = "cgan", gan_out;
    std::uint64_t aug_seed = 1;
    std::size_t smote_k = 5, cgan_epochs = 300, cgan_batch = 64;
    std::string aug_positive;
    auto* aug = app.add_subcommand("augment", "oversample minority classes");
    aug->add_option("--train", aug_in, "scaled training CSV")->required();
    aug->add_option("--out", aug_out, "augmented CSV to write")->required();
    aug->add_option("--method", aug_method, "real, ros, smote or cgan")
        ->check(CLI::IsMember({"real", "ros", "smote", "cgan"}))
        ->capture_default_str();
    aug->add_option("--seed", aug_seed, "seed")->capture_default_str();
    aug->add_option("--smote-k", smote_k, "SMOTE neighbours")->capture_default_str();
    aug->add_option("--cgan-epochs", cgan_epochs, "CGAN epochs")->capture_default_str();
    aug->add_option("--cgan-batch", cgan_batch, "CGAN batch size")->capture_default_str();
    aug->add_option("--save-gan", gan_out, "also save the trained CGAN");
    aug->add_option("--positive", aug_positive, "binary mode: S1, S2 or S3 against the rest");

    // train
    std::string train_in, model_out, model_kind = "mlp", train_positive;
    std::uint64_t train_seed = 1;
    std::size_t n_classes = 0;
    std::map<std::string, std::string> model_opts;
    auto* train = app.add_subcommand("train", "train a classifier");
    train->add_option("--train", train_in, "training CSV")->required();
    train->add_option("--model", model_kind, "rf, xgb, mlp or cnn1d")
        ->check(CLI::IsMember({"rf", "xgb", "mlp", "cnn1d"}))
        ->capture_default_str();
    train->add_option("--out", model_out, "model file to write")->required();
    train->add_option("--seed", train_seed, "seed")->capture_default_str();
    train->add_option("--classes", n_classes, "class count (0 = infer)")->capture_default_str();
    train->add_option("--positive", train_positive, "binary mode: S1, S2 or S3 against the rest");
    for (const char* k : {"rf-trees", "xgb-rounds", "xgb-depth", "nn-epochs", "nn-batch", "nn-lr", "threads"})
        train->add_option_function<std::string>(std::string("--") + k, [&model_opts, k](const std::string& v) { model_opts[k] = v; },
                                                "model hyperparameter");

    // eval
    std::string eval_model, eval_test, eval_positive;
    auto* eval = app.add_subcommand("eval", "score a model on a test CSV");
    eval->add_option("--model", eval_model, "model file")->required();
    eval->add_option("--test", eval_test, "test CSV")->required();
    eval->add_option("--positive", eval_positive, "binary mode: S1, S2 or S3 against the rest");

    // viz
    std::string viz_real, viz_synth, viz_out;
    std::uint64_t viz_seed = 1;
    std::size_t tsne_points = 400, tsne_iters = 500;
    auto* vz = app.add_subcommand("viz", "KDE, PCA and t-SNE diagnostics as SVG + CSV");
    vz->add_option("--real", viz_real, "real rows (features CSV)")->required();
    vz->add_option("--synthetic", viz_synth, "augmented CSV; its synthetic rows are compared with real minority rows");
    vz->add_option("--out", viz_out, "output directory")->required();
    vz->add_option("--seed", viz_seed, "seed")->capture_default_str();
    vz->add_option("--tsne-points", tsne_points, "t-SNE subsample size")->capture_default_str();
    vz->add_option("--tsne-iters", tsne_iters, "t-SNE iterations")->capture_default_str();

    // pipeline
    std::string config_path;
    std::map<std::string, std::string> overrides;
    auto* pipe = app.add_subcommand("pipeline", "run the augmentation x model grid end to end");
    pipe->add_option("--config", config_path, "TOML-style key = value file");
    int key_status = 0;
    try {
        for (const auto& [key, help] : config_keys())
            pipe->add_option_function<std::string>("--" + key, [&overrides, key = key](const std::string& v) { overrides[key] = v; },
                                                   help);
    } catch (const Failure& f) {
        key_status = f.code;
    }
    if (key_status) return key_status;

    CLI11_PARSE(app, argc, argv);
    itgan_set_warnings(quiet ? 0 : 1);

    try {
        if (gen->parsed()) {
            size_t days = 0;
            double frac = 0;
            check(itgan_generate_corpus(&spec, corpus_out.c_str(), &days, &frac), "gen-corpus");
            std::printf("wrote %zu user-days to %s (malicious fraction %.4f)\n", days, corpus_out.c_str(), frac);
        } else if (feat->parsed()) {
            itgan_dataset* ds = nullptr;
            check(itgan_featurize(feat_corpus.c_str(), d1.empty() ? nullptr : d1.c_str(), d2.empty() ? nullptr : d2.c_str(), &ds),
                  "featurize");
            DatasetPtr owned(ds);
            check(itgan_dataset_write_csv(ds, feat_out.c_str()), "featurize");
            std::printf("wrote %zu rows to %s\n", itgan_dataset_rows(ds), feat_out.c_str());
        } else if (split->parsed()) {
            auto all = read_dataset(split_in);
            itgan_dataset *tr = nullptr, *te = nullptr;
            check(itgan_split(all.get(), test_frac, split_seed, &tr, &te), "split");
            DatasetPtr train_ds(tr), test_ds(te);
            std::filesystem::create_directories(split_dir);
            const std::string dir = split_dir + "/";
            if (!no_scale) {
                const std::string scaler = dir + "scaler.csv";
                check(itgan_scaler_fit(tr, scaler.c_str()), "split");
                itgan_dataset *str = nullptr, *ste = nullptr;
                check(itgan_scaler_apply(scaler.c_str(), tr, &str), "split");
                train_ds.reset(str);
                check(itgan_scaler_apply(scaler.c_str(), te, &ste), "split");
                test_ds.reset(ste);
            }
            check(itgan_dataset_write_csv(train_ds.get(), (dir + "train.csv").c_str()), "split");
            check(itgan_dataset_write_csv(test_ds.get(), (dir + "test.csv").c_str()), "split");
            std::printf("train %zu rows, test %zu rows in %s\n", itgan_dataset_rows(train_ds.get()),
                        itgan_dataset_rows(test_ds.get()), split_dir.c_str());
        } else if (aug->parsed()) {
            auto in = read_dataset(aug_in);
            if (!aug_positive.empty()) {
                itgan_dataset* b = nullptr;
                check(itgan_dataset_binarize(in.get(), parse_class(aug_positive), &b), "augment");
                in.reset(b);
            }
            std::map<std::string, std::string> opts{{"smote-k", std::to_string(smote_k)},
                                                    {"cgan-epochs", std::to_string(cgan_epochs)},
                                                    {"cgan-batch", std::to_string(cgan_batch)}};
            if (!gan_out.empty()) opts["gan-out"] = gan_out;
            itgan_dataset* out = nullptr;
            check(itgan_augment(in.get(), aug_method.c_str(), kv_lines(opts).c_str(), aug_seed, &out), "augment");
            DatasetPtr owned(out);
            check(itgan_dataset_write_csv(out, aug_out.c_str()), "augment");
            std::printf("wrote %zu rows (%zu added) to %s\n", itgan_dataset_rows(out),
                        itgan_dataset_rows(out) - itgan_dataset_rows(in.get()), aug_out.c_str());
        } else if (train->parsed()) {
            auto in = read_dataset(train_in);
            if (!train_positive.empty()) {
                itgan_dataset* b = nullptr;
                check(itgan_dataset_binarize(in.get(), parse_class(train_positive), &b), "train");
                in.reset(b);
            }
            itgan_model* m = nullptr;
            check(itgan_model_train(in.get(), model_kind.c_str(), kv_lines(model_opts).c_str(), n_classes, train_seed, &m),
                  "train");
            ModelPtr owned(m);
            check(itgan_model_save(m, model_out.c_str()), "train");
            std::printf("wrote %s model (%zu classes) to %s\n", itgan_model_kind(m), itgan_model_classes(m), model_out.c_str());
        } else if (eval->parsed()) {
            itgan_model* m = nullptr;
            check(itgan_model_load(eval_model.c_str(), &m), "eval");
            ModelPtr model(m);
            auto test = read_dataset(eval_test);
            if (!eval_positive.empty()) {
                itgan_dataset* b = nullptr;
                check(itgan_dataset_binarize(test.get(), parse_class(eval_positive), &b), "eval");
                test.reset(b);
            }
            const size_t n = itgan_dataset_rows(test.get());
            std::vector<int> truth(n), pred(n);
            check(itgan_dataset_copy_labels(test.get(), truth.data(), n), "eval");
            check(itgan_model_predict(m, test.get(), pred.data(), n), "eval");
            const size_t k = itgan_model_classes(m);
            itgan_metrics metrics{};
            std::vector<long> cm(k * k);
            check(itgan_evaluate(truth.data(), pred.data(), n, k, &metrics, cm.data()), "eval");
            print_metrics(metrics);
            std::printf("confusion (rows = true class)\n");
            for (size_t i = 0; i < k; ++i) {
                for (size_t j = 0; j < k; ++j) std::printf("%s%ld", j ? " " : "", cm[i * k + j]);
                std::printf("\n");
            }
        } else if (vz->parsed()) {
            auto real = read_dataset(viz_real);
            DatasetPtr synth;
            if (!viz_synth.empty()) {
                auto augmented = read_dataset(viz_synth);
                itgan_dataset* s = nullptr;
                check(itgan_dataset_synthetic_rows(augmented.get(), &s), "viz");
                synth.reset(s);
            }
            OwnedString files;
            check(itgan_viz_bundle(real.get(), synth.get(), viz_out.c_str(), viz_seed, tsne_points, tsne_iters, &files.p),
                  "viz");
            std::printf("%s", files.p);
        } else if (pipe->parsed()) {
            itgan_report* r = nullptr;
            const std::string ov = kv_lines(overrides);
            check(itgan_pipeline_run(config_path.empty() ? nullptr : config_path.c_str(), ov.c_str(), &r), "pipeline");
            ReportPtr report(r);
            check(itgan_report_emit(r, nullptr), "pipeline");
            std::printf("%-12s %-6s %-6s %9s %9s %9s %9s %9s\n", "task", "aug", "model", "precision", "recall", "f-score",
                        "kappa", "mcc");
            for (size_t i = 0; i < itgan_report_cell_count(r); ++i) {
                const char *task, *a, *m;
                itgan_metrics mt{};
                check(itgan_report_cell(r, i, &task, &a, &m, &mt), "pipeline");
                std::printf("%-12s %-6s %-6s %9.4f %9.4f %9.4f %9.4f %9.4f\n", task, a, m, mt.precision_macro,
                            mt.recall_macro, mt.f1_macro, mt.kappa, mt.mcc);
            }
            std::printf("report written to %s/report.json\n", itgan_report_out_dir(r));
        }
    } catch (const Failure& f) {
        return f.code;
    }
    return 0;
}
