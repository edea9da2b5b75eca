/* C interface of the itgan library.  Every handle is opaque and owned by the
 * caller once returned; release it with the matching _free function.  Calls
 * return an itgan_status; on failure itgan_last_error() describes the most
 * recent error raised on the calling thread. */
#ifndef ITGAN_H
#define ITGAN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ITGAN_API __declspec(dllexport)
#else
#define ITGAN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum itgan_status {
    ITGAN_OK = 0,
    ITGAN_ERR_INVALID_ARGUMENT = 1,
    ITGAN_ERR_IO = 2,
    ITGAN_ERR_PARSE = 3,
    ITGAN_ERR_STATE = 4,
    ITGAN_ERR_INTERNAL = 5
} itgan_status;

typedef struct itgan_dataset itgan_dataset;
typedef struct itgan_model itgan_model;
typedef struct itgan_report itgan_report;

ITGAN_API const char* itgan_version(void);
ITGAN_API const char* itgan_status_name(itgan_status status);
/* Message of the last failure on this thread ("" if none). */
ITGAN_API const char* itgan_last_error(void);
ITGAN_API void itgan_set_warnings(int enabled);
/* Frees strings handed out through char** parameters. */
ITGAN_API void itgan_string_free(char* s);

/* ---- corpus generation ---- */

typedef struct itgan_corpus_spec {
    size_t users;
    size_t days;
    uint64_t seed;
    double malicious_fraction;
    double overlap;
} itgan_corpus_spec;

ITGAN_API void itgan_corpus_spec_default(itgan_corpus_spec* spec);
/* Writes logon/device/file/email/http.csv and labels.csv into out_dir.
 * user_days and realized_fraction may be NULL. */
ITGAN_API itgan_status itgan_generate_corpus(const itgan_corpus_spec* spec, const char* out_dir, size_t* user_days,
                                             double* realized_fraction);

/* ---- datasets ---- */

/* Featurizes corpus_dir against corpus_dir/labels.csv.  NULL keyword paths
 * select the built-in corpora. */
ITGAN_API itgan_status itgan_featurize(const char* corpus_dir, const char* d1_path, const char* d2_path,
                                       itgan_dataset** out);
ITGAN_API itgan_status itgan_dataset_read_csv(const char* path, itgan_dataset** out);
ITGAN_API itgan_status itgan_dataset_write_csv(const itgan_dataset* ds, const char* path);
/* x is row-major rows x cols. */
ITGAN_API itgan_status itgan_dataset_from_arrays(const double* x, const int* y, size_t rows, size_t cols,
                                                 itgan_dataset** out);
ITGAN_API void itgan_dataset_free(itgan_dataset* ds);
ITGAN_API size_t itgan_dataset_rows(const itgan_dataset* ds);
ITGAN_API size_t itgan_dataset_cols(const itgan_dataset* ds);
ITGAN_API itgan_status itgan_dataset_copy_features(const itgan_dataset* ds, double* out, size_t len);
ITGAN_API itgan_status itgan_dataset_copy_labels(const itgan_dataset* ds, int* out, size_t len);
/* Rows added by an oversampler or generator. */
ITGAN_API itgan_status itgan_dataset_synthetic_rows(const itgan_dataset* ds, itgan_dataset** out);
/* label == positive becomes 1, everything else 0. */
ITGAN_API itgan_status itgan_dataset_binarize(const itgan_dataset* ds, int positive, itgan_dataset** out);

/* Stratified split; the test fraction is rounded per class. */
ITGAN_API itgan_status itgan_split(const itgan_dataset* ds, double test_frac, uint64_t seed, itgan_dataset** train,
                                   itgan_dataset** test);
/* Fits a min-max scaler on train and writes it as CSV. */
ITGAN_API itgan_status itgan_scaler_fit(const itgan_dataset* train, const char* scaler_csv);
ITGAN_API itgan_status itgan_scaler_apply(const char* scaler_csv, const itgan_dataset* in, itgan_dataset** out);

/* ---- augmentation ---- */

/* method: real, ros, smote or cgan.  options holds "key = value" lines or
 * ';'-separated pairs: smote-k, cgan-epochs, cgan-batch, gan-out (path to
 * save the trained generator).  NULL means defaults. */
ITGAN_API itgan_status itgan_augment(const itgan_dataset* train, const char* method, const char* options,
                                     uint64_t seed, itgan_dataset** out);

/* ---- classifiers ---- */

/* kind: rf, xgb, mlp or cnn1d.  options as for itgan_augment with keys
 * rf-trees, xgb-rounds, xgb-depth, nn-epochs, nn-batch, nn-lr, threads.
 * n_classes = 0 infers max label + 1. */
ITGAN_API itgan_status itgan_model_train(const itgan_dataset* train, const char* kind, const char* options,
                                         size_t n_classes, uint64_t seed, itgan_model** out);
ITGAN_API itgan_status itgan_model_save(const itgan_model* model, const char* path);
ITGAN_API itgan_status itgan_model_load(const char* path, itgan_model** out);
ITGAN_API const char* itgan_model_kind(const itgan_model* model);
ITGAN_API size_t itgan_model_classes(const itgan_model* model);
ITGAN_API itgan_status itgan_model_predict(const itgan_model* model, const itgan_dataset* ds, int* out, size_t len);
ITGAN_API void itgan_model_free(itgan_model* model);

/* ---- metrics ---- */

typedef struct itgan_metrics {
    double precision_macro;
    double recall_macro;
    double f1_macro;
    double kappa;
    double mcc;
} itgan_metrics;

/* confusion (k*k, row = true class) may be NULL. */
ITGAN_API itgan_status itgan_evaluate(const int* y_true, const int* y_pred, size_t n, size_t k, itgan_metrics* out,
                                      long* confusion);

/* ---- diagnostics ---- */

/* KDE (L1, L5), PCA and t-SNE plots as SVG + CSV.  synthetic may be NULL.
 * files receives a newline-separated list of written SVGs (may be NULL). */
ITGAN_API itgan_status itgan_viz_bundle(const itgan_dataset* real, const itgan_dataset* synthetic,
                                        const char* out_dir, uint64_t seed, size_t tsne_points, size_t tsne_iters,
                                        char** files);

/* ---- pipeline ---- */

/* "key<TAB>help" lines for every configuration key. */
ITGAN_API itgan_status itgan_config_keys(char** out);
/* Runs the grid.  config_path may be NULL (defaults); overrides holds
 * "key = value" lines applied on top. */
ITGAN_API itgan_status itgan_pipeline_run(const char* config_path, const char* overrides, itgan_report** out);
/* Writes report.json and report.md; dir NULL = the run's output directory. */
ITGAN_API itgan_status itgan_report_emit(const itgan_report* report, const char* dir);
ITGAN_API itgan_status itgan_report_json(const itgan_report* report, char** out);
ITGAN_API const char* itgan_report_out_dir(const itgan_report* report);
ITGAN_API size_t itgan_report_cell_count(const itgan_report* report);
/* Borrowed strings stay valid until the report is freed. */
ITGAN_API itgan_status itgan_report_cell(const itgan_report* report, size_t index, const char** task,
                                         const char** augmentation, const char** model, itgan_metrics* metrics);
ITGAN_API void itgan_report_free(itgan_report* report);

#ifdef __cplusplus
}
#endif

#endif
