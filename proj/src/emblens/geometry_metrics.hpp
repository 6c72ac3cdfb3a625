#ifndef EMBLENS_GEOMETRY_METRICS_HPP
#define EMBLENS_GEOMETRY_METRICS_HPP

#include <vector>

#include "types.hpp"

namespace emblens {

// Mean silhouette over all samples, Euclidean distance. Requires at least
// two non-empty clusters; samples in singleton clusters score 0.
double silhouette(const EmbeddingSet& embeddings, const Partition& partition);

// The per-sample values behind silhouette(), exposed for diagnostics.
std::vector<double> per_sample_silhouettes(const EmbeddingSet& embeddings,
                                           const Partition& partition);

struct HistogramSpec {
    double sigma_factor = 0.4; // 0.8 for the pre-trained-model variant
};

struct HistogramEntropyResult {
    double value = 0.0;
    // Dimensions whose standard deviation fell below 1e-12 and were dropped
    // from binning.
    std::vector<std::size_t> degenerate_dims;
    bool all_degenerate = false;
    std::size_t occupied_bins = 0;
};

// Entropy (nats) of the empirical distribution over a grid with bin width
// l_i = sigma_factor * sigma_i per dimension, origin at the data minimum,
// top edge clamped into the last bin. Sigma uses the population convention.
HistogramEntropyResult histogram_entropy(const EmbeddingSet& embeddings,
                                         const HistogramSpec& spec);

} // namespace emblens

#endif
