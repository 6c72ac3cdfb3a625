#include "emblens.h"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>

#include "emblens/error.hpp"
#include "emblens/geometry_metrics.hpp"
#include "emblens/kmeans.hpp"
#include "emblens/partition_metrics.hpp"
#include "emblens/pipeline.hpp"
#include "emblens/probes.hpp"
#include "emblens/stats.hpp"
#include "emblens/store.hpp"
#include "emblens/synth.hpp"
#include "emblens/umap_lite.hpp"

struct emblens_embeddings {
    emblens::EmbeddingSet set;
};

struct emblens_partition {
    emblens::Partition partition;
};

struct emblens_report {
    emblens::TrajectoryReport report;
};

namespace {

thread_local std::string g_last_error;

emblens_status set_error(emblens_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

emblens_status status_from_code(emblens::ErrorCode code) {
    switch (code) {
        case emblens::ErrorCode::io: return EMBLENS_ERR_IO;
        case emblens::ErrorCode::format: return EMBLENS_ERR_FORMAT;
        case emblens::ErrorCode::invalid: return EMBLENS_ERR_INVALID;
        case emblens::ErrorCode::eval: return EMBLENS_ERR_EVAL;
    }
    return EMBLENS_ERR_EVAL;
}

template <typename Body>
emblens_status guarded(Body&& body) {
    try {
        body();
        return EMBLENS_OK;
    } catch (const emblens::Error& err) {
        return set_error(status_from_code(err.code()), err.what());
    } catch (const std::exception& err) {
        return set_error(EMBLENS_ERR_EVAL, err.what());
    }
}

char* copy_string(const std::string& text) {
    char* out = static_cast<char*>(std::malloc(text.size() + 1));
    std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

bool parse_env_seed(std::uint64_t* seed) {
    const char* env = std::getenv("EMBLENS_SEED");
    if (!env || !*env) return false;
    std::uint64_t value = 0;
    const auto* end = env + std::strlen(env);
    auto [ptr, ec] = std::from_chars(env, end, value);
    if (ec != std::errc() || ptr != end) return false;
    *seed = value;
    return true;
}

emblens::ReducerKind parse_reducer(const char* name) {
    if (std::strcmp(name, "pca") == 0) return emblens::ReducerKind::pca;
    if (std::strcmp(name, "umap-lite") == 0) return emblens::ReducerKind::umap_lite;
    emblens::fail(emblens::ErrorCode::invalid,
                  std::string("unknown reducer '") + name + "' (expected pca or umap-lite)");
}

emblens::ReferenceKind parse_reference(const char* name) {
    if (std::strcmp(name, "auto") == 0) return emblens::ReferenceKind::automatic;
    if (std::strcmp(name, "knn") == 0) return emblens::ReferenceKind::knn;
    if (std::strcmp(name, "linear") == 0) return emblens::ReferenceKind::linear;
    if (std::strcmp(name, "external") == 0) return emblens::ReferenceKind::external;
    emblens::fail(emblens::ErrorCode::invalid,
                  std::string("unknown reference '") + name +
                      "' (expected auto, knn, linear, or external)");
}

} // namespace

extern "C" {

const char* emblens_version(void) { return "0.1.0"; }

const char* emblens_last_error(void) { return g_last_error.c_str(); }

void emblens_string_free(char* text) { std::free(text); }

uint64_t emblens_default_seed(void) {
    std::uint64_t seed = 0;
    return parse_env_seed(&seed) ? seed : 42;
}

/* ---- embeddings ---- */

emblens_status emblens_embeddings_load(const char* path, emblens_embeddings** out) {
    if (!path || !out) return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] {
        auto handle = std::make_unique<emblens_embeddings>();
        handle->set = emblens::load_embeddings(path);
        *out = handle.release();
    });
}

emblens_status emblens_embeddings_from_data(const double* values, uint32_t n, uint32_t d,
                                            emblens_embeddings** out) {
    if (!values || !out) return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] {
        auto handle = std::make_unique<emblens_embeddings>();
        handle->set.values =
            emblens::Matrix(n, d, std::vector<double>(values, values + std::size_t(n) * d));
        handle->set.validate();
        *out = handle.release();
    });
}

emblens_status emblens_embeddings_save(const emblens_embeddings* embeddings, const char* path,
                                       int dtype_f32) {
    if (!embeddings || !path) return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] {
        emblens::save_embeddings(embeddings->set, path,
                                 dtype_f32 ? emblens::Dtype::f32 : emblens::Dtype::f64);
    });
}

void emblens_embeddings_free(emblens_embeddings* embeddings) { delete embeddings; }

uint32_t emblens_embeddings_rows(const emblens_embeddings* embeddings) {
    return embeddings ? static_cast<uint32_t>(embeddings->set.n()) : 0;
}

uint32_t emblens_embeddings_cols(const emblens_embeddings* embeddings) {
    return embeddings ? static_cast<uint32_t>(embeddings->set.d()) : 0;
}

double emblens_embeddings_value(const emblens_embeddings* embeddings, uint32_t row,
                                uint32_t col) {
    return embeddings->set.values(row, col);
}

/* ---- partitions ---- */

emblens_status emblens_partition_load(const char* path, uint32_t n_expected,
                                      emblens_partition** out) {
    if (!path || !out) return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] {
        auto handle = std::make_unique<emblens_partition>();
        handle->partition = emblens::load_partition(path, n_expected);
        *out = handle.release();
    });
}

emblens_status emblens_partition_from_labels(const int32_t* labels, uint32_t n,
                                             emblens_partition** out) {
    if (!labels || !out) return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] {
        auto handle = std::make_unique<emblens_partition>();
        handle->partition = emblens::partition_from_labels(
            std::vector<std::int32_t>(labels, labels + n));
        *out = handle.release();
    });
}

void emblens_partition_free(emblens_partition* partition) { delete partition; }

uint32_t emblens_partition_size(const emblens_partition* partition) {
    return partition ? static_cast<uint32_t>(partition->partition.n()) : 0;
}

int32_t emblens_partition_num_labels(const emblens_partition* partition) {
    return partition ? partition->partition.k : 0;
}

int32_t emblens_partition_label(const emblens_partition* partition, uint32_t i) {
    return partition->partition.assignments[i];
}

/* ---- reduction ---- */

void emblens_reducer_options_init(emblens_reducer_options* options) {
    options->method = "umap-lite";
    options->target_dim = 3;
    options->n_neighbors = 50;
    options->layout_epochs = 200;
    options->negative_samples = 5;
    options->min_dist = 0.1;
    options->seed = 42;
}

emblens_status emblens_reduce(const emblens_embeddings* embeddings,
                              const emblens_reducer_options* options,
                              emblens_embeddings** out) {
    if (!embeddings || !options || !out) return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] {
        emblens::ReducerConfig config;
        config.method = parse_reducer(options->method ? options->method : "umap-lite");
        config.target_dim = options->target_dim;
        config.n_neighbors = options->n_neighbors;
        config.layout_epochs = options->layout_epochs;
        config.negative_samples = options->negative_samples;
        config.min_dist = options->min_dist;
        config.seed = options->seed;
        auto handle = std::make_unique<emblens_embeddings>();
        handle->set = emblens::reduce(embeddings->set, config);
        *out = handle.release();
    });
}

/* ---- k-means ---- */

void emblens_kmeans_options_init(emblens_kmeans_options* options) {
    options->k = 10;
    options->distance = "cosine";
    options->n_restarts = 10;
    options->max_iters = 300;
    options->tol = 1e-6;
    options->seed = 42;
}

namespace {

emblens::KMeansConfig kmeans_config_from(const emblens_kmeans_options* options) {
    emblens::KMeansConfig config;
    config.k = options->k;
    if (options->distance && std::strcmp(options->distance, "euclidean") == 0)
        config.distance = emblens::Distance::euclidean;
    else if (!options->distance || std::strcmp(options->distance, "cosine") == 0)
        config.distance = emblens::Distance::cosine;
    else
        emblens::fail(emblens::ErrorCode::invalid,
                      std::string("unknown distance '") + options->distance + "'");
    config.n_restarts = options->n_restarts;
    config.max_iters = options->max_iters;
    config.tol = options->tol;
    config.seed = options->seed;
    return config;
}

} // namespace

emblens_status emblens_kmeans(const emblens_embeddings* embeddings,
                              const emblens_kmeans_options* options, emblens_partition** out,
                              double* objective) {
    if (!embeddings || !options || !out) return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] {
        const auto result = emblens::kmeans(embeddings->set, kmeans_config_from(options));
        auto handle = std::make_unique<emblens_partition>();
        handle->partition = result.partition;
        if (objective) *objective = result.objective;
        *out = handle.release();
    });
}

emblens_status emblens_cluster_pair(const emblens_embeddings* embeddings, int32_t k1,
                                    const emblens_kmeans_options* options,
                                    emblens_partition** c1, emblens_partition** c2) {
    if (!embeddings || !options || !c1 || !c2)
        return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] {
        const auto [first, second] =
            emblens::cluster_pair(embeddings->set, k1, kmeans_config_from(options));
        auto h1 = std::make_unique<emblens_partition>();
        auto h2 = std::make_unique<emblens_partition>();
        h1->partition = first.partition;
        h2->partition = second.partition;
        *c1 = h1.release();
        *c2 = h2.release();
    });
}

/* ---- metrics ---- */

emblens_status emblens_partition_entropy(const emblens_partition* partition, double* out) {
    if (!partition || !out) return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] { *out = emblens::partition_entropy(partition->partition); });
}

emblens_status emblens_mutual_information(const emblens_partition* p,
                                          const emblens_partition* q, double* out) {
    if (!p || !q || !out) return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] {
        *out = emblens::mutual_information(emblens::contingency(p->partition, q->partition));
    });
}

emblens_status emblens_expected_mutual_information(const emblens_partition* p,
                                                   const emblens_partition* q, double* out) {
    if (!p || !q || !out) return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] {
        *out = emblens::expected_mutual_information(
            emblens::contingency(p->partition, q->partition));
    });
}

emblens_status emblens_adjusted_mutual_information(const emblens_partition* p,
                                                   const emblens_partition* q, double* out) {
    if (!p || !q || !out) return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] {
        *out = emblens::adjusted_mutual_information(p->partition, q->partition);
    });
}

emblens_status emblens_silhouette(const emblens_embeddings* embeddings,
                                  const emblens_partition* partition, double* out) {
    if (!embeddings || !partition || !out) return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] { *out = emblens::silhouette(embeddings->set, partition->partition); });
}

emblens_status emblens_histogram_entropy(const emblens_embeddings* embeddings,
                                         double sigma_factor, double* out, int* degenerate) {
    if (!embeddings || !out) return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] {
        emblens::HistogramSpec spec;
        spec.sigma_factor = sigma_factor;
        const auto result = emblens::histogram_entropy(embeddings->set, spec);
        *out = result.value;
        if (degenerate)
            *degenerate = (!result.degenerate_dims.empty() || result.all_degenerate) ? 1 : 0;
    });
}

emblens_status emblens_pearson(const double* x, const double* y, uint32_t n, double* r,
                               double* p) {
    if (!x || !y || !r || !p) return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] {
        const auto result = emblens::pearson({x, n}, {y, n});
        *r = result.r;
        *p = result.p;
    });
}

/* ---- probes ---- */

void emblens_probe_options_init(emblens_probe_options* options) {
    options->kind = "knn";
    options->knn_k = 5;
    options->train_fraction = 0.5;
    options->epochs = 200;
    options->learning_rate = 0.5;
    options->l2 = 1e-4;
    options->seed = 42;
}

emblens_status emblens_probe(const emblens_embeddings* embeddings,
                             const emblens_partition* ground_truth,
                             const emblens_probe_options* options, double* accuracy) {
    if (!embeddings || !ground_truth || !options || !accuracy)
        return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] {
        emblens::ProbeConfig config;
        config.knn_k = options->knn_k;
        config.train_fraction = options->train_fraction;
        config.epochs = options->epochs;
        config.learning_rate = options->learning_rate;
        config.l2 = options->l2;
        config.seed = options->seed;
        if (options->kind && std::strcmp(options->kind, "linear") == 0) {
            config.kind = emblens::ProbeKind::linear;
            *accuracy = emblens::linear_probe(embeddings->set, ground_truth->partition, config);
        } else if (!options->kind || std::strcmp(options->kind, "knn") == 0) {
            config.kind = emblens::ProbeKind::knn;
            *accuracy = emblens::knn_probe(embeddings->set, ground_truth->partition, config);
        } else {
            emblens::fail(emblens::ErrorCode::invalid,
                          std::string("unknown probe kind '") + options->kind + "'");
        }
    });
}

/* ---- evaluation ---- */

void emblens_eval_options_init(emblens_eval_options* options) {
    options->k1 = -1;
    options->bin_sigma_factor = -1.0;
    options->reducer = nullptr;
    options->n_neighbors = -1;
    options->reference = nullptr;
    options->has_seed = 0;
    options->seed = 0;
    options->jobs = 0;
}

emblens_status emblens_eval_run(const char* manifest_path,
                                const emblens_eval_options* options, emblens_report** out) {
    if (!manifest_path || !options || !out) return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] {
        const emblens::RunManifest manifest = emblens::load_manifest(manifest_path);
        emblens::EvalSettings settings = manifest.settings;

        if (options->k1 >= 0) settings.k1 = options->k1;
        if (options->bin_sigma_factor >= 0.0)
            settings.bin_sigma_factor = options->bin_sigma_factor;
        if (options->reducer) settings.reducer = parse_reducer(options->reducer);
        if (options->n_neighbors >= 0) settings.n_neighbors = options->n_neighbors;
        if (options->reference) settings.reference = parse_reference(options->reference);
        if (options->has_seed)
            settings.seed = options->seed;
        else if (!manifest.has_seed)
            settings.seed = emblens_default_seed();

        std::size_t jobs = options->jobs;
        if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());

        auto handle = std::make_unique<emblens_report>();
        handle->report = emblens::evaluate_run(manifest, manifest_path, settings, jobs);
        *out = handle.release();
    });
}

emblens_status emblens_report_load(const char* path, emblens_report** out) {
    if (!path || !out) return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] {
        std::ifstream in(path, std::ios::binary);
        if (!in) emblens::fail(emblens::ErrorCode::io, std::string(path) + ": cannot open");
        std::ostringstream buffer;
        buffer << in.rdbuf();
        auto handle = std::make_unique<emblens_report>();
        handle->report = emblens::report_from_json(buffer.str());
        *out = handle.release();
    });
}

emblens_status emblens_report_json(const emblens_report* report, char** out) {
    if (!report || !out) return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] { *out = copy_string(emblens::report_to_json(report->report)); });
}

emblens_status emblens_report_csv(const emblens_report* report, char** out) {
    if (!report || !out) return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] { *out = copy_string(emblens::report_to_csv(report->report)); });
}

emblens_status emblens_report_summary(const emblens_report* report, char** out) {
    if (!report || !out) return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] { *out = copy_string(emblens::report_summary(report->report)); });
}

int emblens_report_failed(const emblens_report* report) {
    return report && !report->report.failures.empty() ? 1 : 0;
}

void emblens_report_free(emblens_report* report) { delete report; }

/* ---- synthesis ---- */

void emblens_synth_options_init(emblens_synth_options* options) {
    const emblens::SynthConfig defaults;
    options->n_samples = static_cast<uint32_t>(defaults.n_samples);
    options->dim = static_cast<uint32_t>(defaults.dim);
    options->n_classes = static_cast<uint32_t>(defaults.n_classes);
    options->n_milestones = static_cast<uint32_t>(defaults.n_milestones);
    options->within_sigma_start = defaults.within_sigma_start;
    options->within_sigma_end = defaults.within_sigma_end;
    options->between_scale = defaults.between_scale;
    options->outlier_milestones = nullptr;
    options->outlier_rate = 0.0025;
    options->outlier_radius_factor = defaults.outlier_radius_factor;
    options->dtype_f32 = 0;
    options->has_seed = 0;
    options->seed = 0;
}

emblens_status emblens_synth_generate(const emblens_synth_options* options,
                                      const char* out_dir, char** manifest_path_out) {
    if (!options || !out_dir) return set_error(EMBLENS_ERR_NULL, "null argument");
    return guarded([&] {
        emblens::SynthConfig config;
        config.n_samples = options->n_samples;
        config.dim = options->dim;
        config.n_classes = options->n_classes;
        config.n_milestones = options->n_milestones;
        config.within_sigma_start = options->within_sigma_start;
        config.within_sigma_end = options->within_sigma_end;
        config.between_scale = options->between_scale;
        config.outlier_radius_factor = options->outlier_radius_factor;
        config.seed = options->has_seed ? options->seed : emblens_default_seed();

        if (options->outlier_milestones && *options->outlier_milestones) {
            config.outlier_rates.assign(config.n_milestones, 0.0);
            const char* cur = options->outlier_milestones;
            const char* end = cur + std::strlen(cur);
            while (cur < end) {
                const char* comma = std::find(cur, end, ',');
                std::size_t index = 0;
                auto [ptr, ec] = std::from_chars(cur, comma, index);
                if (ec != std::errc() || ptr != comma)
                    emblens::fail(emblens::ErrorCode::invalid,
                                  "outlier milestone list must be comma-separated indices");
                if (index >= config.n_milestones)
                    emblens::fail(emblens::ErrorCode::invalid,
                                  "outlier milestone index " + std::to_string(index) +
                                      " out of range");
                config.outlier_rates[index] = options->outlier_rate;
                if (comma == end) break;
                cur = comma + 1;
            }
        }

        std::filesystem::create_directories(out_dir);
        const auto milestones = emblens::generate_trajectory(config);

        emblens::RunManifest manifest;
        manifest.run_id = "synth-" + std::to_string(config.seed);
        manifest.settings.k1 = static_cast<std::int32_t>(config.n_classes);
        manifest.settings.seed = config.seed;
        manifest.has_seed = true;

        const std::filesystem::path base(out_dir);
        for (const auto& milestone : milestones) {
            emblens::MilestoneEntry entry;
            entry.id = milestone.id;
            entry.epoch = milestone.epoch;
            entry.embeddings_path = (base / (milestone.id + ".emb")).string();
            emblens::save_embeddings(milestone.embeddings, entry.embeddings_path,
                                     options->dtype_f32 ? emblens::Dtype::f32
                                                        : emblens::Dtype::f64);
            entry.labels_path = (base / (milestone.id + ".labels")).string();
            emblens::save_partition(*milestone.ground_truth, *entry.labels_path);
            entry.reference_value = milestone.reference_value;
            manifest.milestones.push_back(std::move(entry));
        }
        const auto manifest_path = (base / "manifest.json").string();
        emblens::save_manifest(manifest, manifest_path);
        if (manifest_path_out) *manifest_path_out = copy_string(manifest_path);
    });
}

/* ---- validation ---- */

emblens_status emblens_validate_manifest(const char* path, char** diagnostics, int* valid) {
    if (!path || !diagnostics || !valid) return set_error(EMBLENS_ERR_NULL, "null argument");
    std::ostringstream out;
    bool ok = true;
    try {
        const emblens::RunManifest manifest = emblens::load_manifest(path);
        for (const auto& entry : manifest.milestones) {
            try {
                const emblens::Milestone milestone = emblens::load_milestone(entry);
                std::size_t zero_rows = 0;
                for (std::size_t i = 0; i < milestone.embeddings.n(); ++i)
                    if (emblens::norm(milestone.embeddings.values.row(i)) <= 1e-12)
                        ++zero_rows;
                if (zero_rows > 0)
                    out << "warning: " << entry.id << ": " << zero_rows
                        << " zero-norm row(s); cosine-based steps will reject them\n";
                if (static_cast<std::size_t>(2 * manifest.settings.k1) >
                    milestone.embeddings.n())
                    out << "warning: " << entry.id
                        << ": fewer samples than 2*k1; clustering will fail\n";
                out << "ok: " << entry.id << " (n=" << milestone.embeddings.n()
                    << ", d=" << milestone.embeddings.d()
                    << (milestone.ground_truth ? ", labels" : "")
                    << (milestone.reference_value ? ", reference" : "") << ")\n";
            } catch (const std::exception& err) {
                ok = false;
                out << "error: " << err.what() << "\n";
            }
        }
    } catch (const std::exception& err) {
        ok = false;
        out << "error: " << err.what() << "\n";
    }
    *diagnostics = copy_string(out.str());
    *valid = ok ? 1 : 0;
    return EMBLENS_OK;
}

} // extern "C"
