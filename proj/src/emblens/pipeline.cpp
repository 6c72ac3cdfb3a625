#include "pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <span>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "error.hpp"
#include "geometry_metrics.hpp"
#include "kmeans.hpp"
#include "partition_metrics.hpp"
#include "probes.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "store.hpp"
#include "umap_lite.hpp"

namespace emblens {

const std::vector<std::string> kMetricOrder = {
    "ami_gt",        "clustering_agreement", "silhouette_gt", "silhouette_c1",
    "histogram_entropy", "knn_probe",        "linear_probe",  "reference",
};

const MetricValue* MilestoneRecord::find(const std::string& name) const {
    for (const auto& [metric, value] : metrics)
        if (metric == name) return &value;
    return nullptr;
}

namespace {

// Milestones with far-flung samples get their entropy value flagged, since
// outliers inflate the bin widths and drag the measurement down.
bool looks_outlier_suspect(const EmbeddingSet& reduced) {
    const std::size_t n = reduced.n();
    std::vector<double> centroid(reduced.d(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = reduced.values.row(i);
        for (std::size_t j = 0; j < reduced.d(); ++j) centroid[j] += row[j];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    std::vector<double> dists(n);
    for (std::size_t i = 0; i < n; ++i)
        dists[i] = euclidean_distance(reduced.values.row(i), centroid);
    std::vector<double> sorted = dists;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n / 2),
                     sorted.end());
    const double median = sorted[n / 2];
    const double max_dist = *std::max_element(dists.begin(), dists.end());
    return max_dist > 10.0 * std::max(median, 1e-12);
}

std::size_t count_non_empty(const Partition& partition) {
    std::size_t non_empty = 0;
    for (auto c : partition.label_counts())
        if (c > 0) ++non_empty;
    return non_empty;
}

} // namespace

MilestoneRecord evaluate_milestone(const Milestone& milestone, const EvalSettings& settings) {
    MilestoneRecord record;
    record.milestone_id = milestone.id;
    record.epoch = milestone.epoch;
    record.seed = derive_seed(settings.seed, "milestone." + milestone.id);

    const EmbeddingSet& raw = milestone.embeddings;
    raw.validate();

    // Reduction. Inputs already at or below the target dimensionality pass
    // through; tiny inputs fall back to PCA, which has no neighbor count.
    EmbeddingSet reduced;
    const auto target_dim = static_cast<std::size_t>(settings.target_dim);
    if (raw.d() <= target_dim) {
        reduced = raw;
        record.reducer_used = "identity";
    } else {
        ReducerConfig reducer_config;
        reducer_config.method = settings.reducer;
        reducer_config.target_dim = target_dim;
        reducer_config.n_neighbors = static_cast<std::size_t>(settings.n_neighbors);
        reducer_config.layout_epochs = static_cast<std::size_t>(settings.layout_epochs);
        reducer_config.min_dist = settings.min_dist;
        reducer_config.negative_samples = static_cast<std::size_t>(settings.negative_samples);
        reducer_config.seed = derive_seed(record.seed, "reduce");
        if (reducer_config.method == ReducerKind::umap_lite &&
            raw.n() <= reducer_config.n_neighbors)
            reducer_config.method = ReducerKind::pca;
        if (reducer_config.method == ReducerKind::pca &&
            target_dim > std::min(raw.n(), raw.d()))
            fail(ErrorCode::invalid, "milestone too small for target_dim");
        reduced = reduce(raw, reducer_config);
        record.reducer_used = reducer_name(reducer_config.method);
    }

    KMeansConfig kmeans_config;
    kmeans_config.distance = Distance::cosine;
    kmeans_config.n_restarts = settings.kmeans_restarts;
    kmeans_config.max_iters = settings.kmeans_max_iters;
    kmeans_config.tol = settings.kmeans_tol;
    kmeans_config.seed = derive_seed(record.seed, "cluster");
    const auto [c1, c2] = cluster_pair(reduced, settings.k1, kmeans_config);

    std::vector<std::pair<std::string, MetricValue>> metrics;
    auto add = [&metrics](const std::string& name, double value,
                          std::vector<std::string> flags = {}) {
        metrics.emplace_back(name, MetricValue{value, std::move(flags)});
    };

    if (milestone.ground_truth) {
        if (milestone.ground_truth->n() != raw.n())
            fail(ErrorCode::invalid, "ground truth length does not match embeddings");
        add("ami_gt", ami_vs_ground_truth(c1.partition, *milestone.ground_truth));
    }

    add("clustering_agreement", clustering_agreement(c1.partition, c2.partition));

    if (milestone.ground_truth) {
        if (count_non_empty(*milestone.ground_truth) >= 2) {
            add("silhouette_gt", silhouette(raw, *milestone.ground_truth));
        } else {
            MetricValue value;
            value.value = 0.0;
            value.flags.push_back("degenerate-ground-truth");
            metrics.emplace_back("silhouette_gt", std::move(value));
        }
    }

    // S_1 is scored on the original space with the clusters found in the
    // reduced space.
    add("silhouette_c1", silhouette(raw, c1.partition));

    {
        HistogramSpec spec;
        spec.sigma_factor = settings.bin_sigma_factor;
        const HistogramEntropyResult entropy = histogram_entropy(reduced, spec);
        std::vector<std::string> flags;
        if (!entropy.degenerate_dims.empty() || entropy.all_degenerate)
            flags.push_back("degenerate-dimension");
        if (looks_outlier_suspect(reduced)) flags.push_back("outlier-suspect");
        add("histogram_entropy", entropy.value, std::move(flags));
    }

    if (milestone.ground_truth) {
        ProbeConfig probe;
        probe.knn_k = settings.knn_k;
        probe.train_fraction = settings.train_fraction;
        probe.epochs = settings.probe_epochs;
        probe.learning_rate = settings.probe_learning_rate;
        probe.l2 = settings.probe_l2;

        probe.kind = ProbeKind::knn;
        probe.seed = derive_seed(record.seed, "probe.knn");
        add("knn_probe", knn_probe(raw, *milestone.ground_truth, probe));

        probe.kind = ProbeKind::linear;
        probe.seed = derive_seed(record.seed, "probe.linear");
        add("linear_probe", linear_probe(raw, *milestone.ground_truth, probe));
    }

    if (milestone.reference_value) add("reference", *milestone.reference_value);

    // Keep the canonical order regardless of computation order above.
    for (const auto& name : kMetricOrder)
        for (auto& entry : metrics)
            if (entry.first == name) record.metrics.push_back(std::move(entry));
    return record;
}

namespace {

struct Series {
    std::vector<double> values;
    std::vector<std::int64_t> epochs;
};

std::optional<Series> complete_series(const std::vector<MilestoneRecord>& records,
                                      const std::string& name) {
    Series series;
    for (const auto& record : records) {
        const MetricValue* value = record.find(name);
        if (!value) return std::nullopt;
        series.values.push_back(value->value);
        series.epochs.push_back(record.epoch);
    }
    return series;
}

bool is_constant(std::span<const double> values) {
    for (double v : values)
        if (v != values.front()) return false;
    return true;
}

CorrelationVariant correlate_variant(std::span<const double> x, std::span<const double> y) {
    CorrelationVariant variant;
    variant.n = x.size();
    if (x.size() < 3 || is_constant(x) || is_constant(y)) return variant;
    const PearsonResult result = pearson(x, y);
    variant.defined = true;
    variant.r = result.r;
    variant.p = result.p;
    if (result.p < 0.05)
        variant.significance = result.r > 0.0 ? "positive" : "negative";
    else
        variant.significance = "not-significant";
    return variant;
}

} // namespace

std::vector<CorrelationEntry> correlate_records(const std::vector<MilestoneRecord>& records,
                                                const std::string& reference_metric) {
    if (records.size() < 3)
        fail(ErrorCode::invalid, "correlation requires at least 3 milestones");
    const auto reference = complete_series(records, reference_metric);
    if (!reference)
        fail(ErrorCode::invalid,
             "reference series '" + reference_metric + "' is missing for some milestone");

    std::vector<CorrelationEntry> entries;
    for (const auto& name : kMetricOrder) {
        if (name == reference_metric) continue;
        const auto series = complete_series(records, name);
        if (!series) continue;

        CorrelationEntry entry;
        entry.metric = name;
        entry.with_init = correlate_variant(series->values, reference->values);

        std::vector<double> x_without, y_without;
        for (std::size_t i = 0; i < series->values.size(); ++i) {
            if (series->epochs[i] <= 0) continue;
            x_without.push_back(series->values[i]);
            y_without.push_back(reference->values[i]);
        }
        entry.without_init = correlate_variant(x_without, y_without);
        entries.push_back(std::move(entry));
    }
    return entries;
}

namespace {

std::string resolve_reference_metric(const std::vector<MilestoneRecord>& records,
                                     ReferenceKind kind, std::string* problem) {
    auto have = [&records](const std::string& name) {
        return complete_series(records, name).has_value();
    };
    switch (kind) {
        case ReferenceKind::external:
            if (have("reference")) return "reference";
            *problem = "reference 'external' requested but some milestone lacks reference_value";
            return "";
        case ReferenceKind::knn:
            if (have("knn_probe")) return "knn_probe";
            *problem = "reference 'knn' requested but some milestone lacks labels";
            return "";
        case ReferenceKind::linear:
            if (have("linear_probe")) return "linear_probe";
            *problem = "reference 'linear' requested but some milestone lacks labels";
            return "";
        case ReferenceKind::automatic:
            if (have("reference")) return "reference";
            if (have("linear_probe")) return "linear_probe";
            if (have("knn_probe")) return "knn_probe";
            return ""; // series-only run
    }
    return "";
}

void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& body) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                body(i);
            }
        });
    }
    for (auto& worker : workers) worker.join();
}

} // namespace

TrajectoryReport evaluate_run(const RunManifest& manifest, const std::string& manifest_path,
                              const EvalSettings& settings, std::size_t jobs) {
    TrajectoryReport report;
    report.run_id = manifest.run_id;
    report.manifest_path = manifest_path;
    report.settings = settings;
    report.records.resize(manifest.milestones.size());

    std::vector<std::string> errors(manifest.milestones.size());
    parallel_for(manifest.milestones.size(), jobs, [&](std::size_t i) {
        const MilestoneEntry& entry = manifest.milestones[i];
        try {
            const Milestone milestone = load_milestone(entry);
            report.records[i] = evaluate_milestone(milestone, settings);
        } catch (const std::exception& err) {
            errors[i] = std::string("milestone ") + entry.id + ": " + err.what();
        }
    });

    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (errors[i].empty()) continue;
        report.records[i].milestone_id = manifest.milestones[i].id;
        report.records[i].epoch = manifest.milestones[i].epoch;
        report.records[i].failed = true;
        report.failures.push_back(errors[i]);
    }

    if (!report.failures.empty()) return report;

    std::string problem;
    report.reference_metric =
        resolve_reference_metric(report.records, settings.reference, &problem);
    if (!problem.empty()) {
        report.failures.push_back(problem);
        return report;
    }
    if (report.reference_metric.empty()) return report; // series-only

    if (report.records.size() >= 3)
        report.correlations = correlate_records(report.records, report.reference_metric);
    else
        report.failures.push_back("correlation skipped: fewer than 3 milestones");
    return report;
}

namespace {

using nlohmann::json;

json settings_to_json(const EvalSettings& settings) {
    json out;
    out["k1"] = settings.k1;
    out["k2"] = 2 * settings.k1;
    out["bin_sigma_factor"] = settings.bin_sigma_factor;
    out["reducer"] = reducer_name(settings.reducer);
    out["n_neighbors"] = settings.n_neighbors;
    out["target_dim"] = settings.target_dim;
    out["layout_epochs"] = settings.layout_epochs;
    out["min_dist"] = settings.min_dist;
    out["negative_samples"] = settings.negative_samples;
    out["kmeans_restarts"] = settings.kmeans_restarts;
    out["kmeans_max_iters"] = settings.kmeans_max_iters;
    out["kmeans_tol"] = settings.kmeans_tol;
    out["knn_k"] = settings.knn_k;
    out["train_fraction"] = settings.train_fraction;
    out["probe_epochs"] = settings.probe_epochs;
    out["probe_learning_rate"] = settings.probe_learning_rate;
    out["probe_l2"] = settings.probe_l2;
    out["reference"] = reference_name(settings.reference);
    out["seed"] = settings.seed;
    return out;
}

EvalSettings settings_from_report_json(const json& node) {
    EvalSettings settings;
    settings.k1 = node.at("k1").get<std::int32_t>();
    settings.bin_sigma_factor = node.at("bin_sigma_factor").get<double>();
    const std::string reducer = node.at("reducer").get<std::string>();
    settings.reducer = reducer == "pca" ? ReducerKind::pca : ReducerKind::umap_lite;
    settings.n_neighbors = node.at("n_neighbors").get<std::int32_t>();
    settings.target_dim = node.at("target_dim").get<std::int32_t>();
    settings.layout_epochs = node.at("layout_epochs").get<std::int32_t>();
    settings.min_dist = node.at("min_dist").get<double>();
    settings.negative_samples = node.at("negative_samples").get<std::int32_t>();
    settings.kmeans_restarts = node.at("kmeans_restarts").get<std::int32_t>();
    settings.kmeans_max_iters = node.at("kmeans_max_iters").get<std::int32_t>();
    settings.kmeans_tol = node.at("kmeans_tol").get<double>();
    settings.knn_k = node.at("knn_k").get<std::int32_t>();
    settings.train_fraction = node.at("train_fraction").get<double>();
    settings.probe_epochs = node.at("probe_epochs").get<std::int32_t>();
    settings.probe_learning_rate = node.at("probe_learning_rate").get<double>();
    settings.probe_l2 = node.at("probe_l2").get<double>();
    const std::string reference = node.at("reference").get<std::string>();
    if (reference == "knn") settings.reference = ReferenceKind::knn;
    else if (reference == "linear") settings.reference = ReferenceKind::linear;
    else if (reference == "external") settings.reference = ReferenceKind::external;
    else settings.reference = ReferenceKind::automatic;
    settings.seed = node.at("seed").get<std::uint64_t>();
    return settings;
}

json variant_to_json(const CorrelationVariant& variant) {
    json out;
    out["defined"] = variant.defined;
    out["n"] = variant.n;
    out["significance"] = variant.significance;
    if (variant.defined) {
        out["r"] = variant.r;
        out["p"] = variant.p;
    }
    return out;
}

CorrelationVariant variant_from_json(const json& node) {
    CorrelationVariant variant;
    variant.defined = node.at("defined").get<bool>();
    variant.n = node.at("n").get<std::size_t>();
    variant.significance = node.at("significance").get<std::string>();
    if (variant.defined) {
        variant.r = node.at("r").get<double>();
        variant.p = node.at("p").get<double>();
    }
    return variant;
}

} // namespace

std::string report_to_json(const TrajectoryReport& report) {
    json doc;
    doc["format_version"] = 1;
    doc["run_id"] = report.run_id;
    doc["manifest_path"] = report.manifest_path;
    doc["settings"] = settings_to_json(report.settings);
    doc["reference_metric"] = report.reference_metric;

    json milestones = json::array();
    for (const auto& record : report.records) {
        json item;
        item["id"] = record.milestone_id;
        item["epoch"] = record.epoch;
        item["failed"] = record.failed;
        if (!record.failed) {
            item["seed"] = record.seed;
            item["reducer_used"] = record.reducer_used;
            json metrics;
            for (const auto& [name, value] : record.metrics) {
                json cell;
                cell["value"] = value.value;
                cell["flags"] = value.flags;
                metrics[name] = cell;
            }
            item["metrics"] = metrics;
        }
        milestones.push_back(std::move(item));
    }
    doc["milestones"] = milestones;

    json correlations = json::array();
    for (const auto& entry : report.correlations) {
        json item;
        item["metric"] = entry.metric;
        item["with_init"] = variant_to_json(entry.with_init);
        item["without_init"] = variant_to_json(entry.without_init);
        correlations.push_back(std::move(item));
    }
    doc["correlations"] = correlations;
    doc["failures"] = report.failures;
    return doc.dump(2) + "\n";
}

TrajectoryReport report_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& err) {
        fail(ErrorCode::format, std::string("report parse error: ") + err.what());
    }
    TrajectoryReport report;
    try {
        report.run_id = doc.at("run_id").get<std::string>();
        report.manifest_path = doc.at("manifest_path").get<std::string>();
        report.settings = settings_from_report_json(doc.at("settings"));
        report.reference_metric = doc.at("reference_metric").get<std::string>();
        for (const auto& item : doc.at("milestones")) {
            MilestoneRecord record;
            record.milestone_id = item.at("id").get<std::string>();
            record.epoch = item.at("epoch").get<std::int64_t>();
            record.failed = item.at("failed").get<bool>();
            if (!record.failed) {
                record.seed = item.at("seed").get<std::uint64_t>();
                record.reducer_used = item.at("reducer_used").get<std::string>();
                const auto& metrics = item.at("metrics");
                for (const auto& name : kMetricOrder) {
                    if (!metrics.contains(name)) continue;
                    MetricValue value;
                    value.value = metrics.at(name).at("value").get<double>();
                    for (const auto& flag : metrics.at(name).at("flags"))
                        value.flags.push_back(flag.get<std::string>());
                    record.metrics.emplace_back(name, std::move(value));
                }
            }
            report.records.push_back(std::move(record));
        }
        for (const auto& item : doc.at("correlations")) {
            CorrelationEntry entry;
            entry.metric = item.at("metric").get<std::string>();
            entry.with_init = variant_from_json(item.at("with_init"));
            entry.without_init = variant_from_json(item.at("without_init"));
            report.correlations.push_back(std::move(entry));
        }
        for (const auto& failure : doc.at("failures"))
            report.failures.push_back(failure.get<std::string>());
    } catch (const json::exception& err) {
        fail(ErrorCode::format, std::string("report schema error: ") + err.what());
    }
    return report;
}

namespace {

std::string format_value(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

std::string join_flags(const std::vector<std::string>& flags) {
    std::string out;
    for (const auto& flag : flags) {
        if (!out.empty()) out += '|';
        out += flag;
    }
    return out;
}

} // namespace

std::string report_to_csv(const TrajectoryReport& report) {
    std::string out = "milestone_id,epoch,metric,value,flags\n";
    for (const auto& record : report.records) {
        if (record.failed) continue;
        for (const auto& [name, value] : record.metrics) {
            out += record.milestone_id;
            out += ',';
            out += std::to_string(record.epoch);
            out += ',';
            out += name;
            out += ',';
            out += format_value(value.value);
            out += ',';
            out += join_flags(value.flags);
            out += '\n';
        }
    }
    return out;
}

std::string report_summary(const TrajectoryReport& report) {
    std::ostringstream out;
    out << "run: " << report.run_id << "\n";
    const auto& s = report.settings;
    out << "settings: k1=" << s.k1 << " k2=" << 2 * s.k1
        << " bin_sigma_factor=" << s.bin_sigma_factor
        << " reducer=" << reducer_name(s.reducer) << " n_neighbors=" << s.n_neighbors
        << " target_dim=" << s.target_dim << " layout_epochs=" << s.layout_epochs
        << " min_dist=" << s.min_dist << " negative_samples=" << s.negative_samples
        << " kmeans_restarts=" << s.kmeans_restarts
        << " kmeans_max_iters=" << s.kmeans_max_iters << " kmeans_tol=" << s.kmeans_tol
        << " knn_k=" << s.knn_k << " train_fraction=" << s.train_fraction
        << " probe_epochs=" << s.probe_epochs
        << " probe_learning_rate=" << s.probe_learning_rate << " probe_l2=" << s.probe_l2
        << " reference=" << reference_name(s.reference) << "\n";
    out << "seed: " << s.seed << "\n";
    out << "milestones: " << report.records.size() << "\n";
    if (!report.reference_metric.empty())
        out << "reference: " << report.reference_metric << "\n";
    if (!report.correlations.empty()) {
        out << "correlations vs " << report.reference_metric
            << " (r / p, with-init | without-init):\n";
        for (const auto& entry : report.correlations) {
            auto describe = [](const CorrelationVariant& variant) {
                if (!variant.defined)
                    return std::string("undefined (n=") + std::to_string(variant.n) + ")";
                char buffer[96];
                std::snprintf(buffer, sizeof buffer, "r=%+.4f p=%.4g [%s] (n=%zu)",
                              variant.r, variant.p, variant.significance.c_str(), variant.n);
                return std::string(buffer);
            };
            out << "  " << entry.metric << ": " << describe(entry.with_init) << " | "
                << describe(entry.without_init) << "\n";
        }
    }
    if (!report.failures.empty()) {
        out << "failures:\n";
        for (const auto& failure : report.failures) out << "  " << failure << "\n";
    }
    return out.str();
}

} // namespace emblens

