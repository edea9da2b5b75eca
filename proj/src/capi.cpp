#include "itgan/itgan.h"

#include "itgan/corpusgen.hpp"
#include "itgan/pipeline.hpp"
#include "itgan/viz.hpp"

#include <algorithm>
#include <cstring>
#include <set>

using namespace itgan;

struct itgan_dataset {
    features::Dataset ds;
};

struct itgan_model {
    pipeline::Model model;
};

struct itgan_report {
    pipeline::EvalReport report;
    std::string out_dir;
};

namespace {

thread_local std::string g_last_error;

itgan_status to_status(ErrorCode c) {
    switch (c) {
        case ErrorCode::InvalidArgument: return ITGAN_ERR_INVALID_ARGUMENT;
        case ErrorCode::Io: return ITGAN_ERR_IO;
        case ErrorCode::Parse: return ITGAN_ERR_PARSE;
        case ErrorCode::State: return ITGAN_ERR_STATE;
        case ErrorCode::Internal: return ITGAN_ERR_INTERNAL;
    }
    return ITGAN_ERR_INTERNAL;
}

template <class F>
itgan_status guard(F&& f) {
    try {
        f();
        g_last_error.clear();
        return ITGAN_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return ITGAN_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return ITGAN_ERR_INTERNAL;
    }
}

template <class T>
const T& need(const T* p, const char* what) {
    if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
    return *p;
}

std::string need_str(const char* s, const char* what) {
    if (!s || !*s) fail(ErrorCode::InvalidArgument, std::string(what) + " must be a non-empty string");
    return s;
}

template <class T>
void need_out(T** out, const char* what) {
    if (!out) fail(ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
    *out = nullptr;
}

char* dup(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

config::KeyValues options(const char* text, const std::set<std::string>& allowed, const char* what) {
    if (!text) return {};
    std::string s(text);
    std::replace(s.begin(), s.end(), ';', '\n');
    auto kv = config::parse_kv(s, what);
    for (const auto& [k, v] : kv)
        if (!allowed.count(k)) fail(ErrorCode::InvalidArgument, std::string(what) + ": unknown option '" + k + "'");
    return kv;
}

itgan_dataset* wrap(features::Dataset ds) { return new itgan_dataset{std::move(ds)}; }

}  // namespace

extern "C" {

const char* itgan_version(void) { return "0.1.0"; }

const char* itgan_status_name(itgan_status s) {
    switch (s) {
        case ITGAN_OK: return "ok";
        case ITGAN_ERR_INVALID_ARGUMENT: return "invalid argument";
        case ITGAN_ERR_IO: return "i/o error";
        case ITGAN_ERR_PARSE: return "parse error";
        case ITGAN_ERR_STATE: return "invalid state";
        case ITGAN_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* itgan_last_error(void) { return g_last_error.c_str(); }

void itgan_set_warnings(int enabled) { set_warnings_enabled(enabled != 0); }

void itgan_string_free(char* s) { std::free(s); }

void itgan_corpus_spec_default(itgan_corpus_spec* spec) {
    if (!spec) return;
    spec->users = 200;
    spec->days = 120;
    spec->seed = 7;
    spec->malicious_fraction = corpusgen::kDefaultMaliciousFraction;
    spec->overlap = 1.0;
}

itgan_status itgan_generate_corpus(const itgan_corpus_spec* spec, const char* out_dir, size_t* user_days,
                                   double* realized_fraction) {
    return guard([&] {
        const auto& s = need(spec, "spec");
        auto cfg = corpusgen::default_config(s.users, s.days, s.seed, s.malicious_fraction);
        cfg.overlap = s.overlap;
        const auto result = corpusgen::generate_corpus(cfg, need_str(out_dir, "out_dir"));
        if (user_days) *user_days = result.truth.size();
        if (realized_fraction) *realized_fraction = result.malicious_fraction();
    });
}

itgan_status itgan_featurize(const char* corpus_dir, const char* d1_path, const char* d2_path, itgan_dataset** out) {
    return guard([&] {
        need_out(out, "out");
        const std::filesystem::path dir = need_str(corpus_dir, "corpus_dir");
        const auto d1 = d1_path ? features::KeywordCorpus::load(d1_path, "D1") : features::default_d1();
        const auto d2 = d2_path ? features::KeywordCorpus::load(d2_path, "D2") : features::default_d2();
        *out = wrap(features::featurize_corpus(dir, features::load_ground_truth(dir / "labels.csv"), d1, d2));
    });
}

itgan_status itgan_dataset_read_csv(const char* path, itgan_dataset** out) {
    return guard([&] {
        need_out(out, "out");
        *out = wrap(features::read_features_csv(need_str(path, "path")));
    });
}

itgan_status itgan_dataset_write_csv(const itgan_dataset* ds, const char* path) {
    return guard([&] { features::write_features_csv(need_str(path, "path"), need(ds, "dataset").ds); });
}

itgan_status itgan_dataset_from_arrays(const double* x, const int* y, size_t rows, size_t cols, itgan_dataset** out) {
    return guard([&] {
        need_out(out, "out");
        if (rows && (!x || !y)) fail(ErrorCode::InvalidArgument, "x and y must not be NULL");
        if (cols == 0) fail(ErrorCode::InvalidArgument, "cols must be positive");
        Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        if (rows) std::copy(x, x + rows * cols, m.data());
        std::vector<int> labels(y, y + rows);
        auto ds = features::make_dataset(std::move(m), std::move(labels), features::Role::Original);
        ds.validate();
        *out = wrap(std::move(ds));
    });
}

void itgan_dataset_free(itgan_dataset* ds) { delete ds; }

size_t itgan_dataset_rows(const itgan_dataset* ds) { return ds ? ds->ds.rows() : 0; }

size_t itgan_dataset_cols(const itgan_dataset* ds) { return ds ? ds->ds.cols() : 0; }

itgan_status itgan_dataset_copy_features(const itgan_dataset* ds, double* out, size_t len) {
    return guard([&] {
        const auto& d = need(ds, "dataset").ds;
        const auto n = static_cast<size_t>(d.matrix.size());
        if (!out || len < n) fail(ErrorCode::InvalidArgument, "output buffer needs " + std::to_string(n) + " doubles");
        std::copy(d.matrix.data(), d.matrix.data() + n, out);
    });
}

itgan_status itgan_dataset_copy_labels(const itgan_dataset* ds, int* out, size_t len) {
    return guard([&] {
        const auto& d = need(ds, "dataset").ds;
        if (!out || len < d.rows()) fail(ErrorCode::InvalidArgument, "output buffer needs " + std::to_string(d.rows()) + " ints");
        std::copy(d.labels.begin(), d.labels.end(), out);
    });
}

itgan_status itgan_dataset_synthetic_rows(const itgan_dataset* ds, itgan_dataset** out) {
    return guard([&] {
        need_out(out, "out");
        const auto& d = need(ds, "dataset").ds;
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < d.rows(); ++i)
            if (i < d.users.size() && d.users[i] == "synthetic") rows.push_back(i);
        auto sel = d.select(rows);
        sel.role = features::Role::Synthetic;
        *out = wrap(std::move(sel));
    });
}

itgan_status itgan_dataset_binarize(const itgan_dataset* ds, int positive, itgan_dataset** out) {
    return guard([&] {
        need_out(out, "out");
        auto d = need(ds, "dataset").ds;
        for (int& y : d.labels) y = y == positive ? 1 : 0;
        *out = wrap(std::move(d));
    });
}

itgan_status itgan_split(const itgan_dataset* ds, double test_frac, uint64_t seed, itgan_dataset** train,
                         itgan_dataset** test) {
    return guard([&] {
        need_out(train, "train");
        need_out(test, "test");
        auto split = features::stratified_split(need(ds, "dataset").ds, test_frac, seed);
        auto* tr = wrap(std::move(split.train));
        *test = wrap(std::move(split.test));
        *train = tr;
    });
}

itgan_status itgan_scaler_fit(const itgan_dataset* train, const char* scaler_csv) {
    return guard([&] {
        auto d = need(train, "train").ds;
        d.role = features::Role::Train;
        features::write_scaler_csv(need_str(scaler_csv, "scaler_csv"), features::fit_scaler(d));
    });
}

itgan_status itgan_scaler_apply(const char* scaler_csv, const itgan_dataset* in, itgan_dataset** out) {
    return guard([&] {
        need_out(out, "out");
        const auto scaler = features::read_scaler_csv(need_str(scaler_csv, "scaler_csv"));
        *out = wrap(features::apply_scaler(need(in, "dataset").ds, scaler));
    });
}

itgan_status itgan_augment(const itgan_dataset* train, const char* method, const char* opts, uint64_t seed,
                           itgan_dataset** out) {
    return guard([&] {
        need_out(out, "out");
        const auto kv = options(opts, {"smote-k", "cgan-epochs", "cgan-batch", "gan-out"}, "augment options");
        const auto cfg = config::apply({}, [&] {
            auto copy = kv;
            copy.erase("gan-out");
            return copy;
        }());
        pipeline::AugmentOptions a{cfg.smote_k, cfg.cgan_epochs, cfg.cgan_batch};
        auto built = pipeline::build_training_set(need(train, "train").ds, need_str(method, "method"), a, seed);
        if (auto it = kv.find("gan-out"); it != kv.end()) {
            if (!built.gan) fail(ErrorCode::InvalidArgument, "gan-out only applies to the cgan method");
            cgan::save_gan(*built.gan, it->second);
        }
        *out = wrap(std::move(built.train));
    });
}

itgan_status itgan_model_train(const itgan_dataset* train, const char* kind, const char* opts, size_t n_classes,
                               uint64_t seed, itgan_model** out) {
    return guard([&] {
        need_out(out, "out");
        const auto kv = options(opts, {"rf-trees", "xgb-rounds", "xgb-depth", "nn-epochs", "nn-batch", "nn-lr", "threads"},
                                "model options");
        const auto cfg = config::apply({}, kv);
        pipeline::ModelOptions m{cfg.rf_trees, cfg.xgb_rounds, cfg.xgb_depth, cfg.nn_epochs,
                                 cfg.nn_batch, cfg.nn_lr,      cfg.threads};
        *out = new itgan_model{pipeline::train_model(need(train, "train").ds, need_str(kind, "kind"), m, n_classes, seed)};
    });
}

itgan_status itgan_model_save(const itgan_model* model, const char* path) {
    return guard([&] { need(model, "model").model.save(need_str(path, "path")); });
}

itgan_status itgan_model_load(const char* path, itgan_model** out) {
    return guard([&] {
        need_out(out, "out");
        *out = new itgan_model{pipeline::Model::load(need_str(path, "path"))};
    });
}

const char* itgan_model_kind(const itgan_model* model) { return model ? model->model.kind.c_str() : ""; }

size_t itgan_model_classes(const itgan_model* model) { return model ? model->model.n_classes() : 0; }

itgan_status itgan_model_predict(const itgan_model* model, const itgan_dataset* ds, int* out, size_t len) {
    return guard([&] {
        const auto& d = need(ds, "dataset").ds;
        if (!out || len < d.rows()) fail(ErrorCode::InvalidArgument, "output buffer needs " + std::to_string(d.rows()) + " ints");
        const auto pred = need(model, "model").model.predict(d.matrix);
        std::copy(pred.begin(), pred.end(), out);
    });
}

void itgan_model_free(itgan_model* model) { delete model; }

itgan_status itgan_evaluate(const int* y_true, const int* y_pred, size_t n, size_t k, itgan_metrics* out,
                            long* confusion) {
    return guard([&] {
        if (!out) fail(ErrorCode::InvalidArgument, "out must not be NULL");
        if (n && (!y_true || !y_pred)) fail(ErrorCode::InvalidArgument, "label arrays must not be NULL");
        if (k == 0) fail(ErrorCode::InvalidArgument, "k must be positive");
        const auto cm = metrics::confusion(std::vector<int>(y_true, y_true + n), std::vector<int>(y_pred, y_pred + n), k);
        const auto b = metrics::evaluate(cm);
        *out = {b.precision_macro, b.recall_macro, b.f1_macro, b.kappa, b.mcc};
        if (confusion)
            for (size_t i = 0; i < k; ++i)
                for (size_t j = 0; j < k; ++j) confusion[i * k + j] = cm.counts[i][j];
    });
}

itgan_status itgan_viz_bundle(const itgan_dataset* real, const itgan_dataset* synthetic, const char* out_dir,
                              uint64_t seed, size_t tsne_points, size_t tsne_iters, char** files) {
    return guard([&] {
        if (files) *files = nullptr;
        const auto written = pipeline::write_viz_bundle(need(real, "real").ds, synthetic ? &synthetic->ds : nullptr,
                                                        need_str(out_dir, "out_dir"), {tsne_points, tsne_iters, seed});
        if (files) {
            std::string list;
            for (const auto& f : written) list += f + "\n";
            *files = dup(list);
        }
    });
}

itgan_status itgan_config_keys(char** out) {
    return guard([&] {
        need_out(out, "out");
        std::string s;
        for (const auto& k : config::known_keys()) s += std::string(k.key) + "\t" + k.help + "\n";
        *out = dup(s);
    });
}

itgan_status itgan_pipeline_run(const char* config_path, const char* overrides, itgan_report** out) {
    return guard([&] {
        need_out(out, "out");
        config::RunConfig cfg;
        if (config_path) cfg = config::apply(cfg, config::load_kv(config_path));
        if (overrides) cfg = config::apply(cfg, config::parse_kv(overrides, "overrides"));
        auto report = pipeline::run_pipeline(cfg);
        *out = new itgan_report{std::move(report), cfg.out};
    });
}

itgan_status itgan_report_emit(const itgan_report* report, const char* dir) {
    return guard([&] {
        const auto& r = need(report, "report");
        pipeline::emit_report(r.report, dir ? std::string(dir) : r.out_dir);
    });
}

itgan_status itgan_report_json(const itgan_report* report, char** out) {
    return guard([&] {
        need_out(out, "out");
        *out = dup(pipeline::to_json(need(report, "report").report));
    });
}

const char* itgan_report_out_dir(const itgan_report* report) { return report ? report->out_dir.c_str() : ""; }

size_t itgan_report_cell_count(const itgan_report* report) { return report ? report->report.cells.size() : 0; }

itgan_status itgan_report_cell(const itgan_report* report, size_t index, const char** task, const char** augmentation,
                               const char** model, itgan_metrics* metrics) {
    return guard([&] {
        const auto& cells = need(report, "report").report.cells;
        if (index >= cells.size()) fail(ErrorCode::InvalidArgument, "cell index out of range");
        const auto& c = cells[index];
        if (task) *task = c.task.c_str();
        if (augmentation) *augmentation = c.augmentation.c_str();
        if (model) *model = c.model.c_str();
        if (metrics) *metrics = {c.metrics.precision_macro, c.metrics.recall_macro, c.metrics.f1_macro, c.metrics.kappa,
                                 c.metrics.mcc};
    });
}

void itgan_report_free(itgan_report* report) { delete report; }

}  // extern "C"
