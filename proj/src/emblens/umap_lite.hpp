#ifndef EMBLENS_UMAP_LITE_HPP
#define EMBLENS_UMAP_LITE_HPP

#include <cstdint>

#include "neighbor_graph.hpp"
#include "types.hpp"

namespace emblens {

struct ReducerConfig {
    ReducerKind method = ReducerKind::umap_lite;
    std::size_t target_dim = 3;
    std::size_t n_neighbors = 50;
    std::size_t layout_epochs = 200;
    double min_dist = 0.1;
    double spread = 1.0;
    std::size_t negative_samples = 5;
    std::uint64_t seed = 0;
};

// Low-dimensional kernel coefficients for 1 / (1 + a * r^(2b)), fit by least
// squares from (min_dist, spread).
struct KernelCoeffs {
    double a = 1.576943;
    double b = 0.895061;
};

KernelCoeffs fit_kernel(double min_dist, double spread);

// Cross-entropy of the fuzzy graph against the layout, summed over all
// unordered pairs (non-edges carry weight 0). Used to check that the
// optimizer actually improved on its initialization.
double layout_cross_entropy(const Matrix& layout, const NeighborGraph& graph,
                            const KernelCoeffs& kernel);

// Negative-sampling stochastic gradient layout of the fuzzy graph,
// PCA-initialized. Deterministic for a fixed config.
Matrix optimize_layout(const Matrix& init, const NeighborGraph& graph,
                       const ReducerConfig& config);

// Front door: UMAP-style reduction (or plain PCA when config.method says
// so). Propagates the milestone id; deterministic for fixed (input, config).
EmbeddingSet reduce(const EmbeddingSet& embeddings, const ReducerConfig& config);

} // namespace emblens

#endif
