#include "kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "rng.hpp"

namespace emblens {
namespace {

Matrix prepare_points(const EmbeddingSet& embeddings, Distance distance) {
    Matrix points = embeddings.values;
    if (distance == Distance::cosine) {
        for (std::size_t i = 0; i < points.rows(); ++i) {
            auto row = points.row(i);
            const double len = norm(row);
            if (len <= 1e-12)
                fail(ErrorCode::invalid,
                     "cosine k-means requires nonzero rows; row " + std::to_string(i) +
                         " has norm " + std::to_string(len));
            for (double& v : row) v /= len;
        }
    }
    return points;
}

struct LloydState {
    Matrix centroids;
    std::vector<std::int32_t> assignment;
    std::vector<double> assigned_cost;
    double objective = 0.0;
    std::int32_t iterations = 0;
    std::vector<double> trace;
};

// Assign every point to its nearest centroid; ties break toward the lowest
// centroid index.
void assign_points(Distance distance, const Matrix& points, LloydState& state) {
    const std::size_t n = points.rows();
    const std::size_t k = state.centroids.rows();
    state.objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = points.row(i);
        double best = std::numeric_limits<double>::infinity();
        std::int32_t best_c = 0;
        for (std::size_t c = 0; c < k; ++c) {
            const double cost = point_cost(distance, row, state.centroids.row(c));
            if (cost < best) {
                best = cost;
                best_c = static_cast<std::int32_t>(c);
            }
        }
        state.assignment[i] = best_c;
        state.assigned_cost[i] = best;
        state.objective += best;
    }
}

// Empty clusters seize the sample farthest from its current centroid, in
// increasing cluster-index order. Samples from clusters that would become
// empty themselves are not eligible.
void repair_empty_clusters(const Matrix& points, LloydState& state) {
    const std::size_t n = points.rows();
    const std::size_t k = state.centroids.rows();
    std::vector<std::int64_t> sizes(k, 0);
    for (auto a : state.assignment) ++sizes[static_cast<std::size_t>(a)];

    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] != 0) continue;
        std::size_t farthest = n;
        double farthest_cost = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (sizes[static_cast<std::size_t>(state.assignment[i])] <= 1) continue;
            if (state.assigned_cost[i] > farthest_cost) {
                farthest_cost = state.assigned_cost[i];
                farthest = i;
            }
        }
        if (farthest == n) continue; // all remaining clusters are singletons
        const auto old = static_cast<std::size_t>(state.assignment[farthest]);
        state.assignment[farthest] = static_cast<std::int32_t>(c);
        --sizes[old];
        ++sizes[c];
        // The seized sample defines the revived centroid, so its cost drops
        // to zero and the objective never increases.
        auto dst = state.centroids.row(c);
        const auto src = points.row(farthest);
        std::copy(src.begin(), src.end(), dst.begin());
        state.objective -= state.assigned_cost[farthest];
        state.assigned_cost[farthest] = 0.0;
    }
}

void update_centroids(Distance distance, const Matrix& points, LloydState& state) {
    const std::size_t n = points.rows();
    const std::size_t k = state.centroids.rows();
    const std::size_t d = points.cols();
    Matrix sums(k, d, 0.0);
    std::vector<std::int64_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(state.assignment[i]);
        ++sizes[c];
        const auto row = points.row(i);
        auto dst = sums.row(c);
        for (std::size_t j = 0; j < d; ++j) dst[j] += row[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] == 0) continue; // keep the previous centroid
        auto dst = state.centroids.row(c);
        const auto src = sums.row(c);
        if (distance == Distance::euclidean) {
            for (std::size_t j = 0; j < d; ++j)
                dst[j] = src[j] / static_cast<double>(sizes[c]);
        } else {
            const double len = norm(src);
            if (len <= 1e-12) continue; // direction sum cancelled; keep old centroid
            for (std::size_t j = 0; j < d; ++j) dst[j] = src[j] / len;
        }
    }
}

Matrix kmeans_pp_init(Distance distance, const Matrix& points, std::size_t k, Rng& rng) {
    const std::size_t n = points.rows();
    const std::size_t d = points.cols();
    Matrix centroids(k, d);

    std::vector<double> min_cost(n, std::numeric_limits<double>::infinity());
    const std::size_t first = rng.uniform_index(n);
    std::copy(points.row(first).begin(), points.row(first).end(), centroids.row(0).begin());

    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double cost = point_cost(distance, points.row(i), centroids.row(c - 1));
            min_cost[i] = std::min(min_cost[i], cost);
            total += min_cost[i];
        }
        std::size_t chosen;
        if (total <= 0.0) {
            chosen = rng.uniform_index(n); // all points coincide with a centroid
        } else {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            chosen = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += min_cost[i];
                if (acc >= target) {
                    chosen = i;
                    break;
                }
            }
        }
        std::copy(points.row(chosen).begin(), points.row(chosen).end(),
                  centroids.row(c).begin());
    }
    return centroids;
}

LloydState run_lloyd(Distance distance, const Matrix& points, std::size_t k,
                     std::int32_t max_iters, double tol, Rng& rng) {
    const std::size_t n = points.rows();
    LloydState state;
    state.centroids = kmeans_pp_init(distance, points, k, rng);
    state.assignment.assign(n, 0);
    state.assigned_cost.assign(n, 0.0);

    assign_points(distance, points, state);
    repair_empty_clusters(points, state);
    state.trace.push_back(state.objective);
    double prev_objective = state.objective;
    std::vector<std::int32_t> prev_assignment = state.assignment;

    // Each iteration improves centroids for the fixed assignment, then
    // reassigns; both halves are non-increasing in the objective, so the
    // loop always ends in a state consistent with its own centroids.
    for (std::int32_t iter = 1; iter <= max_iters; ++iter) {
        update_centroids(distance, points, state);
        assign_points(distance, points, state);
        repair_empty_clusters(points, state);
        state.trace.push_back(state.objective);
        state.iterations = iter;
        if (state.assignment == prev_assignment) break;
        prev_assignment = state.assignment;
        if (std::fabs(prev_objective - state.objective) <=
            tol * std::max(prev_objective, 1e-300))
            break;
        prev_objective = state.objective;
    }
    return state;
}

} // namespace

double point_cost(Distance distance, std::span<const double> x, std::span<const double> c) {
    if (distance == Distance::euclidean) return squared_distance(x, c);
    return 1.0 - dot(x, c);
}

double clustering_objective(Distance distance, const Matrix& points,
                            const Partition& partition, const Matrix& centroids) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.rows(); ++i)
        total += point_cost(distance, points.row(i),
                            centroids.row(static_cast<std::size_t>(partition.assignments[i])));
    return total;
}

ClusteringResult kmeans(const EmbeddingSet& embeddings, const KMeansConfig& config) {
    const std::size_t n = embeddings.n();
    if (config.k < 1) fail(ErrorCode::invalid, "k-means requires k >= 1");
    if (static_cast<std::size_t>(config.k) > n)
        fail(ErrorCode::invalid, "k-means requires k <= n (k=" + std::to_string(config.k) +
                                     ", n=" + std::to_string(n) + ")");
    if (config.n_restarts < 1) fail(ErrorCode::invalid, "k-means requires n_restarts >= 1");
    if (config.tol < 0.0) fail(ErrorCode::invalid, "k-means requires tol >= 0");

    const Matrix points = prepare_points(embeddings, config.distance);
    const auto k = static_cast<std::size_t>(config.k);

    ClusteringResult best;
    bool have_best = false;
    for (std::int32_t restart = 0; restart < config.n_restarts; ++restart) {
        Rng rng(derive_seed(config.seed, "kmeans.restart",
                            static_cast<std::uint64_t>(restart)));
        LloydState state =
            run_lloyd(config.distance, points, k, config.max_iters, config.tol, rng);
        if (!have_best || state.objective < best.objective) {
            have_best = true;
            best.partition.assignments = state.assignment;
            best.partition.k = config.k;
            best.centroids = std::move(state.centroids);
            best.objective = state.objective;
            best.iterations_run = state.iterations;
            best.restart_index = restart;
            best.objective_trace = std::move(state.trace);
        }
    }
    return best;
}

std::pair<ClusteringResult, ClusteringResult> cluster_pair(const EmbeddingSet& embeddings,
                                                           std::int32_t k1,
                                                           const KMeansConfig& config) {
    if (k1 < 1) fail(ErrorCode::invalid, "cluster_pair requires k1 >= 1");
    if (static_cast<std::size_t>(2 * k1) > embeddings.n())
        fail(ErrorCode::invalid, "cluster_pair requires 2*k1 <= n (k1=" +
                                     std::to_string(k1) + ", n=" +
                                     std::to_string(embeddings.n()) + ")");
    KMeansConfig first = config;
    first.k = k1;
    first.seed = derive_seed(config.seed, "cluster_pair.c1");
    KMeansConfig second = config;
    second.k = 2 * k1;
    second.seed = derive_seed(config.seed, "cluster_pair.c2");
    return {kmeans(embeddings, first), kmeans(embeddings, second)};
}

} // namespace emblens
