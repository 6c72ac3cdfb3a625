#include "pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"

namespace emblens {

void symmetric_eigen(const Matrix& symmetric, std::vector<double>& values, Matrix& vectors) {
    const std::size_t d = symmetric.rows();
    if (symmetric.cols() != d)
        fail(ErrorCode::invalid, "symmetric_eigen requires a square matrix");

    Matrix a = symmetric;
    vectors = Matrix(d, d, 0.0);
    for (std::size_t i = 0; i < d; ++i) vectors(i, i) = 1.0;

    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-30) break;

        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = a(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                const double app = a(p, p);
                const double aqq = a(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t i = 0; i < d; ++i) {
                    const double aip = a(i, p);
                    const double aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < d; ++i) {
                    const double api = a(p, i);
                    const double aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < d; ++i) {
                    const double vip = vectors(i, p);
                    const double viq = vectors(i, q);
                    vectors(i, p) = c * vip - s * viq;
                    vectors(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    values.resize(d);
    for (std::size_t i = 0; i < d; ++i) values[i] = a(i, i);
}

PcaResult pca_fit_transform(const EmbeddingSet& embeddings, std::size_t target_dim) {
    const std::size_t n = embeddings.n();
    const std::size_t d = embeddings.d();
    if (target_dim < 1 || target_dim > std::min(n, d))
        fail(ErrorCode::invalid, "pca target_dim must satisfy 1 <= target_dim <= min(n, d)");

    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = embeddings.values.row(i);
        for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
    }
    for (double& m : mean) m /= static_cast<double>(n);

    Matrix centered(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            centered(i, j) = embeddings.values(i, j) - mean[j];

    Matrix cov(d, d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = centered.row(i);
        for (std::size_t p = 0; p < d; ++p) {
            const double rp = row[p];
            for (std::size_t q = p; q < d; ++q) cov(p, q) += rp * row[q];
        }
    }
    for (std::size_t p = 0; p < d; ++p)
        for (std::size_t q = p; q < d; ++q) {
            cov(p, q) /= static_cast<double>(n);
            cov(q, p) = cov(p, q);
        }

    std::vector<double> eigenvalues;
    Matrix eigenvectors;
    symmetric_eigen(cov, eigenvalues, eigenvectors);

    // Decreasing eigenvalue order with a stable index tie-break.
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
        return eigenvalues[lhs] > eigenvalues[rhs];
    });

    PcaResult result;
    result.explained_variance.resize(target_dim);
    const double trace = std::accumulate(eigenvalues.begin(), eigenvalues.end(), 0.0);
    const double rank_eps = std::max(trace, 1.0) * 1e-12;

    Matrix components(target_dim, d);
    for (std::size_t c = 0; c < target_dim; ++c) {
        const std::size_t src = order[c];
        double eig = eigenvalues[src];
        if (eig < 0.0 && eig > -rank_eps) eig = 0.0;
        result.explained_variance[c] = eig;
        if (eig <= rank_eps) result.rank_deficient = true;

        // Sign convention: the entry of largest magnitude is non-negative;
        // magnitude ties resolve at the lowest index.
        double best_mag = -1.0;
        double best_val = 1.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double v = eigenvectors(j, src);
            if (std::fabs(v) > best_mag + 1e-18) {
                best_mag = std::fabs(v);
                best_val = v;
            }
        }
        const double sign = best_val < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < d; ++j) components(c, j) = sign * eigenvectors(j, src);
    }

    result.reduced.milestone_id = embeddings.milestone_id;
    result.reduced.values = Matrix(n, target_dim);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = centered.row(i);
        for (std::size_t c = 0; c < target_dim; ++c)
            result.reduced.values(i, c) = dot(row, components.row(c));
    }
    return result;
}

} // namespace emblens
