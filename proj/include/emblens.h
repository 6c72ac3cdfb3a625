/*
 * emblens - label-free embedding-quality monitoring.
 *
 * C interface to the evaluation toolkit: opaque handles, integer status
 * codes, and a thread-local error message. Every function that can fail
 * returns emblens_status; on failure emblens_last_error() describes it.
 * Strings returned through char** out-parameters are heap-allocated and
 * must be released with emblens_string_free().
 */
#ifndef EMBLENS_H
#define EMBLENS_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#ifndef EMBLENS_API
#define EMBLENS_API __attribute__((visibility("default")))
#endif

typedef enum emblens_status {
    EMBLENS_OK = 0,
    EMBLENS_ERR_IO = 1,      /* missing, unreadable, or unwritable files */
    EMBLENS_ERR_FORMAT = 2,  /* malformed file contents */
    EMBLENS_ERR_INVALID = 3, /* bad arguments or violated preconditions */
    EMBLENS_ERR_EVAL = 4,    /* failure while evaluating a run */
    EMBLENS_ERR_NULL = 5     /* required pointer argument was NULL */
} emblens_status;

typedef struct emblens_embeddings emblens_embeddings;
typedef struct emblens_partition emblens_partition;
typedef struct emblens_report emblens_report;

EMBLENS_API const char* emblens_version(void);

/* Message for the most recent failure on this thread. */
EMBLENS_API const char* emblens_last_error(void);

EMBLENS_API void emblens_string_free(char* text);

/* Seed used when neither flags nor manifest supply one: the EMBLENS_SEED
 * environment variable if it parses as an unsigned integer, else 42. */
EMBLENS_API uint64_t emblens_default_seed(void);

/* ---- embeddings ----
 * Files are either the EMBV1 binary format or headerless CSV; see the
 * project README for the byte layout. */
EMBLENS_API emblens_status emblens_embeddings_load(const char* path,
                                                   emblens_embeddings** out);
EMBLENS_API emblens_status emblens_embeddings_from_data(const double* values, uint32_t n,
                                                        uint32_t d,
                                                        emblens_embeddings** out);
/* dtype_f32 != 0 stores 32-bit floats, otherwise 64-bit. */
EMBLENS_API emblens_status emblens_embeddings_save(const emblens_embeddings* embeddings,
                                                   const char* path, int dtype_f32);
EMBLENS_API void emblens_embeddings_free(emblens_embeddings* embeddings);
EMBLENS_API uint32_t emblens_embeddings_rows(const emblens_embeddings* embeddings);
EMBLENS_API uint32_t emblens_embeddings_cols(const emblens_embeddings* embeddings);
EMBLENS_API double emblens_embeddings_value(const emblens_embeddings* embeddings,
                                            uint32_t row, uint32_t col);

/* ---- partitions ---- */
EMBLENS_API emblens_status emblens_partition_load(const char* path, uint32_t n_expected,
                                                  emblens_partition** out);
EMBLENS_API emblens_status emblens_partition_from_labels(const int32_t* labels, uint32_t n,
                                                         emblens_partition** out);
EMBLENS_API void emblens_partition_free(emblens_partition* partition);
EMBLENS_API uint32_t emblens_partition_size(const emblens_partition* partition);
EMBLENS_API int32_t emblens_partition_num_labels(const emblens_partition* partition);
EMBLENS_API int32_t emblens_partition_label(const emblens_partition* partition, uint32_t i);

/* ---- dimensionality reduction ---- */
typedef struct emblens_reducer_options {
    const char* method; /* "umap-lite" or "pca" */
    uint32_t target_dim;
    uint32_t n_neighbors;
    uint32_t layout_epochs;
    uint32_t negative_samples;
    double min_dist;
    uint64_t seed;
} emblens_reducer_options;
EMBLENS_API void emblens_reducer_options_init(emblens_reducer_options* options);
EMBLENS_API emblens_status emblens_reduce(const emblens_embeddings* embeddings,
                                          const emblens_reducer_options* options,
                                          emblens_embeddings** out);

/* ---- k-means ---- */
typedef struct emblens_kmeans_options {
    int32_t k;
    const char* distance; /* "cosine" or "euclidean" */
    int32_t n_restarts;
    int32_t max_iters;
    double tol;
    uint64_t seed;
} emblens_kmeans_options;
EMBLENS_API void emblens_kmeans_options_init(emblens_kmeans_options* options);
EMBLENS_API emblens_status emblens_kmeans(const emblens_embeddings* embeddings,
                                          const emblens_kmeans_options* options,
                                          emblens_partition** out, double* objective);
/* Two independent runs at k1 and 2*k1 on derived seed streams. */
EMBLENS_API emblens_status emblens_cluster_pair(const emblens_embeddings* embeddings,
                                                int32_t k1,
                                                const emblens_kmeans_options* options,
                                                emblens_partition** c1,
                                                emblens_partition** c2);

/* ---- metrics (natural logarithms throughout) ---- */
EMBLENS_API emblens_status emblens_partition_entropy(const emblens_partition* partition,
                                                     double* out);
EMBLENS_API emblens_status emblens_mutual_information(const emblens_partition* p,
                                                      const emblens_partition* q, double* out);
EMBLENS_API emblens_status emblens_expected_mutual_information(const emblens_partition* p,
                                                               const emblens_partition* q,
                                                               double* out);
EMBLENS_API emblens_status emblens_adjusted_mutual_information(const emblens_partition* p,
                                                               const emblens_partition* q,
                                                               double* out);
EMBLENS_API emblens_status emblens_silhouette(const emblens_embeddings* embeddings,
                                              const emblens_partition* partition, double* out);
/* degenerate (optional) is set to 1 when any dimension was dropped for
 * having no spread, 0 otherwise. */
EMBLENS_API emblens_status emblens_histogram_entropy(const emblens_embeddings* embeddings,
                                                     double sigma_factor, double* out,
                                                     int* degenerate);
EMBLENS_API emblens_status emblens_pearson(const double* x, const double* y, uint32_t n,
                                           double* r, double* p);

/* ---- probes ---- */
typedef struct emblens_probe_options {
    const char* kind; /* "knn" or "linear" */
    int32_t knn_k;
    double train_fraction;
    int32_t epochs;
    double learning_rate;
    double l2;
    uint64_t seed;
} emblens_probe_options;
EMBLENS_API void emblens_probe_options_init(emblens_probe_options* options);
EMBLENS_API emblens_status emblens_probe(const emblens_embeddings* embeddings,
                                         const emblens_partition* ground_truth,
                                         const emblens_probe_options* options,
                                         double* accuracy);

/* ---- evaluation runs ----
 * Overrides follow flag > manifest > default resolution; negative numbers
 * and NULL strings mean "not overridden". The seed default falls back to
 * EMBLENS_SEED when neither the flag nor the manifest provide one. */
typedef struct emblens_eval_options {
    int32_t k1;
    double bin_sigma_factor;
    const char* reducer;   /* "umap-lite" or "pca" */
    int32_t n_neighbors;
    const char* reference; /* "auto", "knn", "linear", or "external" */
    int has_seed;
    uint64_t seed;
    uint32_t jobs; /* 0 means hardware concurrency */
} emblens_eval_options;
EMBLENS_API void emblens_eval_options_init(emblens_eval_options* options);
/* Evaluates every milestone and correlates metric series against the
 * reference. Milestone failures do not fail the call: the report carries
 * them (emblens_report_failed). */
EMBLENS_API emblens_status emblens_eval_run(const char* manifest_path,
                                            const emblens_eval_options* options,
                                            emblens_report** out);

EMBLENS_API emblens_status emblens_report_load(const char* path, emblens_report** out);
EMBLENS_API emblens_status emblens_report_json(const emblens_report* report, char** out);
EMBLENS_API emblens_status emblens_report_csv(const emblens_report* report, char** out);
EMBLENS_API emblens_status emblens_report_summary(const emblens_report* report, char** out);
EMBLENS_API int emblens_report_failed(const emblens_report* report);
EMBLENS_API void emblens_report_free(emblens_report* report);

/* ---- synthetic trajectories ---- */
typedef struct emblens_synth_options {
    uint32_t n_samples;
    uint32_t dim;
    uint32_t n_classes;
    uint32_t n_milestones;
    double within_sigma_start;
    double within_sigma_end;
    double between_scale;
    /* Comma-separated milestone indices receiving outliers, e.g. "0,3";
     * NULL or empty for none. */
    const char* outlier_milestones;
    double outlier_rate;
    double outlier_radius_factor;
    int dtype_f32;
    int has_seed;
    uint64_t seed;
} emblens_synth_options;
EMBLENS_API void emblens_synth_options_init(emblens_synth_options* options);
/* Writes embeddings, labels, and a manifest loadable by emblens_eval_run
 * into out_dir. On success *manifest_path_out (optional) receives the
 * manifest path. */
EMBLENS_API emblens_status emblens_synth_generate(const emblens_synth_options* options,
                                                  const char* out_dir,
                                                  char** manifest_path_out);

/* ---- validation ----
 * Total function: diagnostics always come back (one line per finding,
 * "ok: <milestone>" for clean ones); *valid is 1 only when nothing is
 * wrong. Warnings do not clear the valid flag. */
EMBLENS_API emblens_status emblens_validate_manifest(const char* path, char** diagnostics,
                                                     int* valid);

#ifdef __cplusplus
}
#endif

#endif /* EMBLENS_H */
