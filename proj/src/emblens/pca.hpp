#ifndef EMBLENS_PCA_HPP
#define EMBLENS_PCA_HPP

#include <vector>

#include "types.hpp"

namespace emblens {

struct PcaResult {
    EmbeddingSet reduced;
    // Eigenvalues of the covariance matrix for the kept components, in
    // decreasing order.
    std::vector<double> explained_variance;
    // Set when the covariance rank fell below target_dim; trailing
    // components then come from the orthonormal completion of the basis.
    bool rank_deficient = false;
};

// Mean-centered principal component projection. Components are ordered by
// decreasing explained variance, and within each component the entry of
// largest magnitude is made non-negative so the output is reproducible.
PcaResult pca_fit_transform(const EmbeddingSet& embeddings, std::size_t target_dim);

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Returns eigenvalues ascending; columns of `vectors` are the eigenvectors.
void symmetric_eigen(const Matrix& symmetric, std::vector<double>& values, Matrix& vectors);

} // namespace emblens

#endif
