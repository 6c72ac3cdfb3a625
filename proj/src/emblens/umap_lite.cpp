#include "umap_lite.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "error.hpp"
#include "pca.hpp"
#include "rng.hpp"

namespace emblens {
namespace {

// Target curve the kernel approximates: 1 inside min_dist, exponential
// falloff beyond it.
double target_membership(double x, double min_dist, double spread) {
    return x <= min_dist ? 1.0 : std::exp(-(x - min_dist) / spread);
}

double clip4(double v) { return std::clamp(v, -4.0, 4.0); }

} // namespace

KernelCoeffs fit_kernel(double min_dist, double spread) {
    if (min_dist < 0.0 || spread <= 0.0)
        fail(ErrorCode::invalid, "kernel fit requires min_dist >= 0 and spread > 0");

    // Damped Gauss-Newton least squares on a fixed grid.
    const int grid = 300;
    KernelCoeffs coeffs; // defaults are the fit for (0.1, 1.0), a good start
    double a = coeffs.a, b = coeffs.b;
    for (int iter = 0; iter < 200; ++iter) {
        double jaa = 0.0, jab = 0.0, jbb = 0.0, ga = 0.0, gb = 0.0;
        for (int g = 1; g <= grid; ++g) {
            const double x = 3.0 * spread * static_cast<double>(g) / grid;
            const double x2b = std::pow(x * x, b);
            const double denom = 1.0 + a * x2b;
            const double f = 1.0 / denom;
            const double resid = f - target_membership(x, min_dist, spread);
            const double df_da = -x2b / (denom * denom);
            const double df_db = -a * x2b * std::log(x * x) / (denom * denom);
            jaa += df_da * df_da;
            jab += df_da * df_db;
            jbb += df_db * df_db;
            ga += df_da * resid;
            gb += df_db * resid;
        }
        const double damp = 1e-9;
        const double det = (jaa + damp) * (jbb + damp) - jab * jab;
        if (std::fabs(det) < 1e-30) break;
        const double step_a = (-(jbb + damp) * ga + jab * gb) / det;
        const double step_b = (jab * ga - (jaa + damp) * gb) / det;
        a += step_a;
        b += step_b;
        a = std::max(a, 1e-3);
        b = std::clamp(b, 1e-3, 4.0);
        if (std::fabs(step_a) < 1e-10 && std::fabs(step_b) < 1e-10) break;
    }
    return {a, b};
}

double layout_cross_entropy(const Matrix& layout, const NeighborGraph& graph,
                            const KernelCoeffs& kernel) {
    const std::size_t n = layout.rows();
    std::unordered_map<std::uint64_t, double> weights;
    weights.reserve(graph.edges.size() * 2);
    for (const auto& edge : graph.edges)
        weights[(static_cast<std::uint64_t>(edge.u) << 32) | edge.v] = edge.weight;

    constexpr double eps = 1e-9;
    double ce = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d2 = squared_distance(layout.row(i), layout.row(j));
            double f = 1.0 / (1.0 + kernel.a * std::pow(d2, kernel.b));
            f = std::clamp(f, eps, 1.0 - eps);
            const auto it = weights.find((static_cast<std::uint64_t>(i) << 32) | j);
            const double w = it == weights.end() ? 0.0 : it->second;
            ce += -w * std::log(f) - (1.0 - w) * std::log(1.0 - f);
        }
    }
    return ce;
}

Matrix optimize_layout(const Matrix& init, const NeighborGraph& graph,
                       const ReducerConfig& config) {
    const std::size_t n = init.rows();
    const std::size_t dim = init.cols();
    const KernelCoeffs kernel = fit_kernel(config.min_dist, config.spread);
    const double a = kernel.a, b = kernel.b;

    Matrix layout = init;
    if (graph.edges.empty()) return layout;

    // Both orientations of every edge take part, as in the reference
    // algorithm: each visit attracts the pair and repels the head from
    // sampled negatives, so repulsion pressure reaches both endpoints.
    struct DirectedEdge {
        std::size_t head;
        std::size_t tail;
        double weight;
    };
    std::vector<DirectedEdge> edges;
    edges.reserve(graph.edges.size() * 2);
    for (const auto& edge : graph.edges) {
        edges.push_back({edge.u, edge.v, edge.weight});
        edges.push_back({edge.v, edge.u, edge.weight});
    }

    double max_weight = 0.0;
    for (const auto& edge : edges) max_weight = std::max(max_weight, edge.weight);

    // Classic epoch scheduling: an edge of weight w is visited roughly
    // (w / max_w) * layout_epochs times in total.
    const std::size_t n_edges = edges.size();
    std::vector<double> epochs_per_sample(n_edges), next_sample(n_edges);
    std::vector<double> epochs_per_negative(n_edges), next_negative(n_edges);
    for (std::size_t e = 0; e < n_edges; ++e) {
        epochs_per_sample[e] = max_weight / edges[e].weight;
        next_sample[e] = epochs_per_sample[e];
        epochs_per_negative[e] =
            epochs_per_sample[e] / static_cast<double>(config.negative_samples);
        next_negative[e] = epochs_per_negative[e];
    }

    Rng rng(derive_seed(config.seed, "umap.layout"));
    const double initial_alpha = 1.0;
    const auto total_epochs = static_cast<double>(config.layout_epochs);

    for (std::size_t epoch = 1; epoch <= config.layout_epochs; ++epoch) {
        const double alpha =
            initial_alpha * (1.0 - static_cast<double>(epoch - 1) / total_epochs);
        const auto epoch_d = static_cast<double>(epoch);
        for (std::size_t e = 0; e < n_edges; ++e) {
            if (next_sample[e] > epoch_d) continue;
            const std::size_t u = edges[e].head;
            auto head = layout.row(u);
            auto tail = layout.row(edges[e].tail);

            double d2 = squared_distance(head, tail);
            if (d2 > 0.0) {
                const double pw = std::pow(d2, b);
                const double coeff = (-2.0 * a * b * pw / d2) / (a * pw + 1.0);
                for (std::size_t k = 0; k < dim; ++k) {
                    const double g = clip4(coeff * (head[k] - tail[k])) * alpha;
                    head[k] += g;
                    tail[k] -= g;
                }
            }
            next_sample[e] += epochs_per_sample[e];

            const auto n_neg = static_cast<std::size_t>(
                std::max(0.0, (epoch_d - next_negative[e]) / epochs_per_negative[e]));
            for (std::size_t s = 0; s < n_neg; ++s) {
                const std::size_t other = rng.uniform_index(n);
                if (other == u) continue;
                const auto negative = layout.row(other);
                d2 = squared_distance(head, negative);
                if (d2 > 0.0) {
                    const double pw = std::pow(d2, b);
                    const double coeff = (2.0 * b) / ((0.001 + d2) * (a * pw + 1.0));
                    for (std::size_t k = 0; k < dim; ++k)
                        head[k] += clip4(coeff * (head[k] - negative[k])) * alpha;
                } else {
                    for (std::size_t k = 0; k < dim; ++k) head[k] += 4.0 * alpha;
                }
            }
            next_negative[e] += static_cast<double>(n_neg) * epochs_per_negative[e];
        }
    }

    for (double v : layout.data())
        if (!std::isfinite(v)) fail(ErrorCode::invalid, "layout diverged to non-finite values");
    return layout;
}

EmbeddingSet reduce(const EmbeddingSet& embeddings, const ReducerConfig& config) {
    const std::size_t n = embeddings.n();
    const std::size_t d = embeddings.d();
    if (config.target_dim < 1) fail(ErrorCode::invalid, "reducer target_dim must be >= 1");
    if (config.target_dim >= d)
        fail(ErrorCode::invalid, "reducer requires target_dim < d (target_dim=" +
                                     std::to_string(config.target_dim) +
                                     ", d=" + std::to_string(d) + ")");

    if (config.method == ReducerKind::pca)
        return pca_fit_transform(embeddings, config.target_dim).reduced;

    if (config.n_neighbors >= n)
        fail(ErrorCode::invalid, "reducer requires n_neighbors < n (n_neighbors=" +
                                     std::to_string(config.n_neighbors) +
                                     ", n=" + std::to_string(n) + ")");

    const NeighborGraph graph = build_neighbor_graph(embeddings, config.n_neighbors);

    // PCA initialization, rescaled so the widest coordinate spans ~10 units.
    Matrix init = pca_fit_transform(embeddings, config.target_dim).reduced.values;
    double max_abs = 0.0;
    for (double v : init.data()) max_abs = std::max(max_abs, std::fabs(v));
    if (max_abs > 0.0)
        for (double& v : init.data()) v *= 10.0 / max_abs;

    EmbeddingSet result;
    result.milestone_id = embeddings.milestone_id;
    result.values = optimize_layout(init, graph, config);
    return result;
}

} // namespace emblens
