// emblens command line: evaluate stored embedding milestones, generate
// synthetic trajectories, run probes, and validate manifests. Everything
// goes through the C API in emblens.h.
//
// Exit codes: 0 success, 1 evaluation failure, 2 input or usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "emblens.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitEvalFailure = 1;
constexpr int kExitUsage = 2;

int exit_code_for(emblens_status status) {
    switch (status) {
        case EMBLENS_OK: return kExitOk;
        case EMBLENS_ERR_EVAL: return kExitEvalFailure;
        default: return kExitUsage;
    }
}

int report_error(emblens_status status) {
    std::cerr << "error: " << emblens_last_error() << "\n";
    return exit_code_for(status);
}

struct OwnedString {
    char* value = nullptr;
    ~OwnedString() { emblens_string_free(value); }
};

bool write_file(const std::string& path, const char* contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out << contents;
    out.flush();
    return static_cast<bool>(out);
}

// Writes the requested report renderings next to the manifest or into
// --out; returns false on I/O trouble.
bool write_report_files(const emblens_report* report, const std::string& out_dir,
                        const std::string& format) {
    std::filesystem::create_directories(out_dir);
    if (format == "text" || format == "both") {
        OwnedString json;
        if (emblens_report_json(report, &json.value) != EMBLENS_OK) return false;
        const auto path = (std::filesystem::path(out_dir) / "report.json").string();
        if (!write_file(path, json.value)) {
            std::cerr << "error: cannot write " << path << "\n";
            return false;
        }
        std::cout << "wrote " << path << "\n";
    }
    if (format == "csv" || format == "both") {
        OwnedString csv;
        if (emblens_report_csv(report, &csv.value) != EMBLENS_OK) return false;
        const auto path = (std::filesystem::path(out_dir) / "report.csv").string();
        if (!write_file(path, csv.value)) {
            std::cerr << "error: cannot write " << path << "\n";
            return false;
        }
        std::cout << "wrote " << path << "\n";
    }
    return true;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"emblens - label-free embedding-quality monitoring"};
    app.require_subcommand(1);

    // ---- eval ----
    auto* eval = app.add_subcommand("eval", "evaluate every milestone in a manifest");
    std::string eval_manifest;
    eval->add_option("manifest", eval_manifest, "run manifest (JSON)")->required();
    std::string eval_out;
    eval->add_option("--out", eval_out, "output directory (default: manifest directory)");
    unsigned eval_jobs = 0;
    eval->add_option("--jobs", eval_jobs, "worker threads (default: available parallelism)");
    std::uint64_t eval_seed = 0;
    auto* eval_seed_opt = eval->add_option("--seed", eval_seed, "run seed");
    std::int32_t eval_k1 = -1;
    eval->add_option("--k1", eval_k1, "clusters for C1 (C2 uses 2*k1)");
    std::string eval_reducer;
    eval->add_option("--reducer", eval_reducer, "pca or umap-lite")
        ->check(CLI::IsMember({"pca", "umap-lite"}));
    std::int32_t eval_neighbors = -1;
    eval->add_option("--neighbors", eval_neighbors, "neighbor count for the reducer");
    double eval_sigma_factor = -1.0;
    auto* sigma_opt = eval->add_option("--sigma-factor", eval_sigma_factor,
                                       "entropy bin width factor (default 0.4)");
    bool pretrained = false;
    eval->add_flag("--pretrained", pretrained,
                   "use the wider 0.8-sigma entropy bins for pre-trained models");
    std::string eval_reference = "auto";
    eval->add_option("--reference", eval_reference, "reference metric")
        ->check(CLI::IsMember({"auto", "knn", "linear", "external"}));
    std::string eval_format = "both";
    eval->add_option("--format", eval_format, "report format(s)")
        ->check(CLI::IsMember({"text", "csv", "both"}));

    // ---- report ----
    auto* report_cmd = app.add_subcommand("report", "re-render a stored report");
    std::string report_path;
    report_cmd->add_option("report", report_path, "report.json produced by eval")->required();
    std::string report_out;
    report_cmd->add_option("--out", report_out, "output directory (default: report directory)");
    std::string report_format = "text";
    report_cmd->add_option("--format", report_format, "format(s) to write")
        ->check(CLI::IsMember({"text", "csv", "both"}));

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "generate a synthetic training trajectory");
    std::string synth_out = "synth-run";
    synth->add_option("--out", synth_out, "output directory");
    emblens_synth_options synth_options;
    emblens_synth_options_init(&synth_options);
    synth->add_option("--samples", synth_options.n_samples, "samples per milestone");
    synth->add_option("--dim", synth_options.dim, "embedding dimensionality");
    synth->add_option("--classes", synth_options.n_classes, "number of classes");
    synth->add_option("--milestones", synth_options.n_milestones, "number of milestones");
    synth->add_option("--sigma-start", synth_options.within_sigma_start,
                      "within-class spread at the first milestone");
    synth->add_option("--sigma-end", synth_options.within_sigma_end,
                      "within-class spread at the last milestone");
    synth->add_option("--between-scale", synth_options.between_scale,
                      "radius of the class-center sphere");
    std::string outlier_milestones;
    synth->add_option("--outlier-milestones", outlier_milestones,
                      "comma-separated milestone indices that receive outliers");
    synth->add_option("--outlier-rate", synth_options.outlier_rate,
                      "fraction of samples replaced by outliers");
    synth->add_option("--outlier-factor", synth_options.outlier_radius_factor,
                      "outlier distance as a multiple of the max row norm");
    std::string synth_dtype = "f64";
    synth->add_option("--dtype", synth_dtype, "stored precision")
        ->check(CLI::IsMember({"f32", "f64"}));
    std::uint64_t synth_seed = 0;
    auto* synth_seed_opt = synth->add_option("--seed", synth_seed, "generator seed");

    // ---- probe ----
    auto* probe = app.add_subcommand("probe", "run a single probe on stored embeddings");
    std::string probe_embeddings, probe_labels;
    probe->add_option("embeddings", probe_embeddings, "embedding file")->required();
    probe->add_option("labels", probe_labels, "label file (one integer per line)")->required();
    emblens_probe_options probe_options;
    emblens_probe_options_init(&probe_options);
    std::string probe_kind = "knn";
    probe->add_option("--kind", probe_kind, "knn or linear")
        ->check(CLI::IsMember({"knn", "linear"}));
    probe->add_option("--knn-k", probe_options.knn_k, "neighbors for the knn probe");
    probe->add_option("--train-fraction", probe_options.train_fraction,
                      "fraction of samples used for training");
    probe->add_option("--epochs", probe_options.epochs, "linear probe epochs");
    probe->add_option("--lr", probe_options.learning_rate, "linear probe learning rate");
    probe->add_option("--l2", probe_options.l2, "linear probe L2 penalty");
    std::uint64_t probe_seed = 0;
    auto* probe_seed_opt = probe->add_option("--seed", probe_seed, "split/probe seed");

    // ---- validate ----
    auto* validate = app.add_subcommand("validate", "check a manifest and its files");
    std::string validate_manifest;
    validate->add_option("manifest", validate_manifest, "run manifest (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int rc = app.exit(err);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    if (eval->parsed()) {
        emblens_eval_options options;
        emblens_eval_options_init(&options);
        options.k1 = eval_k1;
        if (!eval_reducer.empty()) options.reducer = eval_reducer.c_str();
        options.n_neighbors = eval_neighbors;
        if (sigma_opt->count() > 0)
            options.bin_sigma_factor = eval_sigma_factor;
        else if (pretrained)
            options.bin_sigma_factor = 0.8;
        options.reference = eval_reference.c_str();
        if (eval_seed_opt->count() > 0) {
            options.has_seed = 1;
            options.seed = eval_seed;
        }
        options.jobs = eval_jobs;

        emblens_report* report = nullptr;
        const emblens_status status =
            emblens_eval_run(eval_manifest.c_str(), &options, &report);
        if (status != EMBLENS_OK) return report_error(status);

        OwnedString summary;
        emblens_report_summary(report, &summary.value);
        std::cout << summary.value;

        const std::string out_dir =
            eval_out.empty() ? std::filesystem::path(eval_manifest).parent_path().string()
                             : eval_out;
        const bool wrote =
            write_report_files(report, out_dir.empty() ? "." : out_dir, eval_format);
        const bool failed = emblens_report_failed(report) != 0;
        emblens_report_free(report);
        if (!wrote) return kExitEvalFailure;
        return failed ? kExitEvalFailure : kExitOk;
    }

    if (report_cmd->parsed()) {
        emblens_report* report = nullptr;
        const emblens_status status = emblens_report_load(report_path.c_str(), &report);
        if (status != EMBLENS_OK) return report_error(status);
        OwnedString summary;
        emblens_report_summary(report, &summary.value);
        std::cout << summary.value;
        const std::string out_dir =
            report_out.empty() ? std::filesystem::path(report_path).parent_path().string()
                               : report_out;
        const bool wrote =
            write_report_files(report, out_dir.empty() ? "." : out_dir, report_format);
        emblens_report_free(report);
        return wrote ? kExitOk : kExitEvalFailure;
    }

    if (synth->parsed()) {
        if (!outlier_milestones.empty())
            synth_options.outlier_milestones = outlier_milestones.c_str();
        synth_options.dtype_f32 = synth_dtype == "f32" ? 1 : 0;
        synth_options.has_seed = 1;
        synth_options.seed =
            synth_seed_opt->count() > 0 ? synth_seed : emblens_default_seed();
        std::cout << "settings: samples=" << synth_options.n_samples
                  << " dim=" << synth_options.dim << " classes=" << synth_options.n_classes
                  << " milestones=" << synth_options.n_milestones
                  << " sigma_start=" << synth_options.within_sigma_start
                  << " sigma_end=" << synth_options.within_sigma_end
                  << " between_scale=" << synth_options.between_scale << " outliers=["
                  << outlier_milestones << "] outlier_rate=" << synth_options.outlier_rate
                  << " outlier_factor=" << synth_options.outlier_radius_factor
                  << " dtype=" << synth_dtype << "\n";
        std::cout << "seed: " << synth_options.seed << "\n";

        OwnedString manifest_path;
        const emblens_status status =
            emblens_synth_generate(&synth_options, synth_out.c_str(), &manifest_path.value);
        if (status != EMBLENS_OK) return report_error(status);
        std::cout << "wrote " << manifest_path.value << "\n";
        return kExitOk;
    }

    if (probe->parsed()) {
        probe_options.kind = probe_kind.c_str();
        probe_options.seed =
            probe_seed_opt->count() > 0 ? probe_seed : emblens_default_seed();
        std::cout << "settings: kind=" << probe_kind << " knn_k=" << probe_options.knn_k
                  << " train_fraction=" << probe_options.train_fraction
                  << " epochs=" << probe_options.epochs
                  << " lr=" << probe_options.learning_rate << " l2=" << probe_options.l2
                  << "\n";
        std::cout << "seed: " << probe_options.seed << "\n";

        emblens_embeddings* embeddings = nullptr;
        emblens_status status = emblens_embeddings_load(probe_embeddings.c_str(), &embeddings);
        if (status != EMBLENS_OK) return report_error(status);
        emblens_partition* labels = nullptr;
        status = emblens_partition_load(probe_labels.c_str(),
                                        emblens_embeddings_rows(embeddings), &labels);
        if (status != EMBLENS_OK) {
            emblens_embeddings_free(embeddings);
            return report_error(status);
        }
        double accuracy = 0.0;
        status = emblens_probe(embeddings, labels, &probe_options, &accuracy);
        emblens_partition_free(labels);
        emblens_embeddings_free(embeddings);
        if (status != EMBLENS_OK) return report_error(status);
        std::printf("accuracy: %.6f\n", accuracy);
        return kExitOk;
    }

    if (validate->parsed()) {
        OwnedString diagnostics;
        int valid = 0;
        const emblens_status status =
            emblens_validate_manifest(validate_manifest.c_str(), &diagnostics.value, &valid);
        if (status != EMBLENS_OK) return report_error(status);
        std::cout << diagnostics.value;
        return valid ? kExitOk : kExitEvalFailure;
    }

    return kExitUsage;
}
