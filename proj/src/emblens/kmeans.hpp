#ifndef EMBLENS_KMEANS_HPP
#define EMBLENS_KMEANS_HPP

#include <cstdint>
#include <utility>

#include "types.hpp"

namespace emblens {

enum class Distance { cosine, euclidean };

struct KMeansConfig {
    std::int32_t k = 10;
    Distance distance = Distance::cosine;
    std::int32_t n_restarts = 10;
    std::int32_t max_iters = 300;
    double tol = 1e-6;
    std::uint64_t seed = 0;
};

struct ClusteringResult {
    Partition partition;
    Matrix centroids;
    double objective = 0.0;
    std::int32_t iterations_run = 0;
    std::int32_t restart_index = 0;
    // Objective after each Lloyd iteration of the winning restart,
    // starting with the post-initialization assignment. Non-increasing.
    std::vector<double> objective_trace;
};

// Per-sample cost under the configured metric: squared Euclidean distance,
// or 1 - cosine similarity on unit-normalized vectors. The objective is the
// sum of these costs over all samples.
double point_cost(Distance distance, std::span<const double> x, std::span<const double> c);

// Recompute the objective of an assignment against fixed centroids, in
// sample order.
double clustering_objective(Distance distance, const Matrix& points,
                            const Partition& partition, const Matrix& centroids);

// Best-of-n_restarts Lloyd iterations with k-means++ seeding. Deterministic
// for a fixed seed; for cosine distance all rows must have norm > 1e-12.
ClusteringResult kmeans(const EmbeddingSet& embeddings, const KMeansConfig& config);

// Two independent runs at k1 and 2*k1, with PRNG streams derived from
// config.seed so the attempts are independent.
std::pair<ClusteringResult, ClusteringResult> cluster_pair(const EmbeddingSet& embeddings,
                                                           std::int32_t k1,
                                                           const KMeansConfig& config);

} // namespace emblens

#endif
