#ifndef EMBLENS_PROBES_HPP
#define EMBLENS_PROBES_HPP

#include <cstdint>
#include <vector>

#include "types.hpp"

namespace emblens {

enum class ProbeKind { knn, linear };

struct ProbeConfig {
    ProbeKind kind = ProbeKind::knn;
    std::int32_t knn_k = 5;
    double train_fraction = 0.5;
    std::int32_t epochs = 200;
    double learning_rate = 0.5;
    double l2 = 1e-4;
    std::uint64_t seed = 0;
};

// Seeded shuffle split; the first ceil(train_fraction * n) indices train,
// the rest evaluate. Disjoint by construction.
struct ProbeSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> eval;
};

ProbeSplit make_split(std::size_t n, double train_fraction, std::uint64_t seed);

// Majority vote over the knn_k nearest train samples by cosine similarity;
// vote ties break toward the smallest class index. Returns eval accuracy.
double knn_probe(const EmbeddingSet& embeddings, const Partition& ground_truth,
                 const ProbeConfig& config);

// Multinomial logistic regression on frozen embeddings: zero-initialized,
// full-batch gradient descent with cosine-decayed learning rate and L2
// penalty on the weights (bias unpenalized). Returns eval top-1 accuracy.
double linear_probe(const EmbeddingSet& embeddings, const Partition& ground_truth,
                    const ProbeConfig& config);

// Loss and gradient of the softmax cross-entropy objective at the given
// parameters; exposed so the gradient can be checked against finite
// differences. Parameters are laid out as k rows of (d weights + 1 bias).
double softmax_loss_and_gradient(const Matrix& features,
                                 const std::vector<std::int32_t>& labels,
                                 std::int32_t n_classes, double l2,
                                 const std::vector<double>& params,
                                 std::vector<double>* gradient);

} // namespace emblens

#endif
