#ifndef EMBLENS_NEIGHBOR_GRAPH_HPP
#define EMBLENS_NEIGHBOR_GRAPH_HPP

#include <cstdint>
#include <vector>

#include "types.hpp"

namespace emblens {

struct Neighbor {
    std::size_t index;
    double distance;
};

struct FuzzyEdge {
    std::size_t u; // u < v
    std::size_t v;
    double weight; // in (0, 1]
};

// Exact k-nearest-neighbor graph with the fuzzy membership weights used by
// the neighbor-graph reducer. Lists are sorted by distance (ties by index)
// and exclude the sample itself; rho is the distance to the nearest
// neighbor and sigma solves
//   sum_j exp(-max(0, d_ij - rho_i) / sigma_i) = log2(n_neighbors)
// by bisection to 1e-5 relative tolerance. Directed memberships
// a = exp(-max(0, d - rho) / sigma) are symmetrized as w = a + b - a*b.
struct NeighborGraph {
    std::vector<std::vector<Neighbor>> neighbors;
    std::vector<double> rho;
    std::vector<double> sigma;
    std::vector<FuzzyEdge> edges; // sorted by (u, v)
};

NeighborGraph build_neighbor_graph(const EmbeddingSet& embeddings, std::size_t n_neighbors);

} // namespace emblens

#endif
