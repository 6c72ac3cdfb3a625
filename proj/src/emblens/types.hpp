#ifndef EMBLENS_TYPES_HPP
#define EMBLENS_TYPES_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "matrix.hpp"

namespace emblens {

// An n x d set of embedding vectors from one milestone. Entries are always
// finite; row order is sample order and is shared by every artifact derived
// from the same milestone.
struct EmbeddingSet {
    Matrix values;
    std::string milestone_id;

    std::size_t n() const { return values.rows(); }
    std::size_t d() const { return values.cols(); }

    void validate() const {
        if (values.rows() == 0 || values.cols() == 0)
            fail(ErrorCode::invalid, "embedding set must have n >= 1 and d >= 1");
        for (std::size_t i = 0; i < values.rows(); ++i)
            for (std::size_t j = 0; j < values.cols(); ++j)
                if (!std::isfinite(values(i, j)))
                    fail(ErrorCode::invalid,
                         "non-finite embedding entry at row " + std::to_string(i) +
                             ", column " + std::to_string(j));
    }
};

// Assignment of n samples to labels in [0, k). k is an upper bound on the
// number of distinct labels; empty clusters are permitted.
struct Partition {
    std::vector<std::int32_t> assignments;
    std::int32_t k = 0;

    std::size_t n() const { return assignments.size(); }

    void validate() const {
        if (assignments.empty()) fail(ErrorCode::invalid, "partition must be non-empty");
        if (k < 1) fail(ErrorCode::invalid, "partition k must be >= 1");
        for (std::size_t i = 0; i < assignments.size(); ++i)
            if (assignments[i] < 0 || assignments[i] >= k)
                fail(ErrorCode::invalid, "partition label out of range [0, k) at line " +
                                             std::to_string(i));
    }

    std::vector<std::int64_t> label_counts() const {
        std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
        for (auto a : assignments) ++counts[static_cast<std::size_t>(a)];
        return counts;
    }
};

inline Partition partition_from_labels(std::vector<std::int32_t> labels) {
    Partition p;
    p.assignments = std::move(labels);
    std::int32_t max_label = 0;
    for (auto a : p.assignments) max_label = std::max(max_label, a);
    p.k = max_label + 1;
    p.validate();
    return p;
}

// One training checkpoint: embeddings plus optional ground truth and an
// optional externally supplied reference value (e.g. a real probe accuracy).
struct Milestone {
    std::string id;
    std::int64_t epoch = 0;
    EmbeddingSet embeddings;
    std::optional<Partition> ground_truth;
    std::optional<double> reference_value;
};

enum class ReducerKind { pca, umap_lite };
enum class ReferenceKind { automatic, knn, linear, external };

// Evaluation settings after defaulting; embedded verbatim in every report.
struct EvalSettings {
    std::int32_t k1 = 10;
    double bin_sigma_factor = 0.4;
    ReducerKind reducer = ReducerKind::umap_lite;
    std::int32_t n_neighbors = 50;
    std::int32_t target_dim = 3;
    std::int32_t layout_epochs = 200;
    double min_dist = 0.1;
    std::int32_t negative_samples = 5;
    std::int32_t kmeans_restarts = 10;
    std::int32_t kmeans_max_iters = 300;
    double kmeans_tol = 1e-6;
    std::int32_t knn_k = 5;
    double train_fraction = 0.5;
    std::int32_t probe_epochs = 200;
    double probe_learning_rate = 0.5;
    double probe_l2 = 1e-4;
    ReferenceKind reference = ReferenceKind::automatic;
    std::uint64_t seed = 42;
};

// Descriptor for a milestone inside a manifest; paths already resolved
// against the manifest directory.
struct MilestoneEntry {
    std::string id;
    std::int64_t epoch = 0;
    std::string embeddings_path;
    std::optional<std::string> labels_path;
    std::optional<double> reference_value;
};

struct RunManifest {
    std::string run_id;
    std::vector<MilestoneEntry> milestones;
    EvalSettings settings;
    // Which settings the manifest stated explicitly (the rest were defaulted
    // and may be overridden by CLI flags without surprise).
    bool has_seed = false;
};

inline const char* reducer_name(ReducerKind kind) {
    switch (kind) {
        case ReducerKind::pca: return "pca";
        case ReducerKind::umap_lite: return "umap-lite";
    }
    return "unknown";
}

inline const char* reference_name(ReferenceKind kind) {
    switch (kind) {
        case ReferenceKind::automatic: return "auto";
        case ReferenceKind::knn: return "knn";
        case ReferenceKind::linear: return "linear";
        case ReferenceKind::external: return "external";
    }
    return "unknown";
}

} // namespace emblens

#endif
