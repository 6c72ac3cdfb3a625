#include "neighbor_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "error.hpp"

namespace emblens {
namespace {

double membership_sum(const std::vector<Neighbor>& list, double rho, double sigma) {
    double sum = 0.0;
    for (const auto& nb : list)
        sum += std::exp(-std::max(0.0, nb.distance - rho) / sigma);
    return sum;
}

double solve_sigma(const std::vector<Neighbor>& list, double rho, std::size_t k) {
    const double target = std::log2(static_cast<double>(k));
    // The sum grows monotonically with sigma; expand until we bracket the
    // target, then bisect.
    double lo = 1e-12;
    double hi = 1.0;
    for (int i = 0; i < 64 && membership_sum(list, rho, hi) < target; ++i) hi *= 2.0;
    if (membership_sum(list, rho, lo) >= target) return lo;
    while ((hi - lo) / hi > 1e-5) {
        const double mid = 0.5 * (lo + hi);
        if (membership_sum(list, rho, mid) >= target)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

NeighborGraph build_neighbor_graph(const EmbeddingSet& embeddings, std::size_t n_neighbors) {
    const std::size_t n = embeddings.n();
    if (n_neighbors < 2) fail(ErrorCode::invalid, "neighbor graph requires n_neighbors >= 2");
    if (n_neighbors >= n)
        fail(ErrorCode::invalid, "neighbor graph requires n_neighbors < n (n_neighbors=" +
                                     std::to_string(n_neighbors) +
                                     ", n=" + std::to_string(n) + ")");

    NeighborGraph graph;
    graph.neighbors.resize(n);
    graph.rho.resize(n);
    graph.sigma.resize(n);

    std::vector<Neighbor> all(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = embeddings.values.row(i);
        std::size_t out = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            all[out++] = {j, euclidean_distance(row, embeddings.values.row(j))};
        }
        std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_neighbors),
                          all.end(), [](const Neighbor& a, const Neighbor& b) {
                              return a.distance != b.distance ? a.distance < b.distance
                                                              : a.index < b.index;
                          });
        graph.neighbors[i].assign(all.begin(),
                                  all.begin() + static_cast<std::ptrdiff_t>(n_neighbors));
        graph.rho[i] = graph.neighbors[i].front().distance;
        graph.sigma[i] = solve_sigma(graph.neighbors[i], graph.rho[i], n_neighbors);
    }

    // Directed memberships, then the fuzzy union over unordered pairs.
    std::map<std::pair<std::size_t, std::size_t>, std::pair<double, double>> pair_weights;
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& nb : graph.neighbors[i]) {
            const double a =
                std::exp(-std::max(0.0, nb.distance - graph.rho[i]) / graph.sigma[i]);
            const bool forward = i < nb.index;
            const auto key = forward ? std::make_pair(i, nb.index)
                                     : std::make_pair(nb.index, i);
            auto& slot = pair_weights[key];
            (forward ? slot.first : slot.second) = a;
        }
    }
    graph.edges.reserve(pair_weights.size());
    for (const auto& [key, ab] : pair_weights) {
        const double w = ab.first + ab.second - ab.first * ab.second;
        if (w <= 0.0) continue;
        graph.edges.push_back({key.first, key.second, std::min(w, 1.0)});
    }
    return graph;
}

} // namespace emblens
