#include "geometry_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "error.hpp"

namespace emblens {

std::vector<double> per_sample_silhouettes(const EmbeddingSet& embeddings,
                                           const Partition& partition) {
    const std::size_t n = embeddings.n();
    if (partition.n() != n)
        fail(ErrorCode::invalid, "silhouette requires matching embedding and partition lengths");
    const auto k = static_cast<std::size_t>(partition.k);
    const auto sizes = partition.label_counts();
    std::size_t non_empty = 0;
    for (auto s : sizes)
        if (s > 0) ++non_empty;
    if (non_empty < 2)
        fail(ErrorCode::invalid, "silhouette requires at least 2 non-empty clusters");

    // Accumulate per-sample mean distance to each cluster in one pass over
    // unordered pairs.
    std::vector<double> cluster_sums(n * k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row_i = embeddings.values.row(i);
        const auto ci = static_cast<std::size_t>(partition.assignments[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dist = euclidean_distance(row_i, embeddings.values.row(j));
            const auto cj = static_cast<std::size_t>(partition.assignments[j]);
            cluster_sums[i * k + cj] += dist;
            cluster_sums[j * k + ci] += dist;
        }
    }

    std::vector<double> scores(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ci = static_cast<std::size_t>(partition.assignments[i]);
        if (sizes[ci] <= 1) {
            scores[i] = 0.0; // singleton convention
            continue;
        }
        const double a = cluster_sums[i * k + ci] / static_cast<double>(sizes[ci] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (c == ci || sizes[c] == 0) continue;
            b = std::min(b, cluster_sums[i * k + c] / static_cast<double>(sizes[c]));
        }
        const double denom = std::max(a, b);
        scores[i] = denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return scores;
}

double silhouette(const EmbeddingSet& embeddings, const Partition& partition) {
    const auto scores = per_sample_silhouettes(embeddings, partition);
    double total = 0.0;
    for (double s : scores) total += s;
    return total / static_cast<double>(scores.size());
}

HistogramEntropyResult histogram_entropy(const EmbeddingSet& embeddings,
                                         const HistogramSpec& spec) {
    if (spec.sigma_factor <= 0.0)
        fail(ErrorCode::invalid, "histogram sigma factor must be positive");
    const std::size_t n = embeddings.n();
    const std::size_t d = embeddings.d();

    HistogramEntropyResult result;
    std::vector<double> mins(d), widths(d);
    std::vector<std::int64_t> max_index(d);
    std::vector<bool> active(d, false);
    for (std::size_t dim = 0; dim < d; ++dim) {
        double lo = embeddings.values(0, dim), hi = lo, mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = embeddings.values(i, dim);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            mean += v;
        }
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double diff = embeddings.values(i, dim) - mean;
            var += diff * diff;
        }
        var /= static_cast<double>(n); // population convention
        const double sigma = std::sqrt(var);
        if (sigma < 1e-12) {
            result.degenerate_dims.push_back(dim);
            continue;
        }
        active[dim] = true;
        mins[dim] = lo;
        widths[dim] = spec.sigma_factor * sigma;
        std::int64_t top = static_cast<std::int64_t>(std::floor((hi - lo) / widths[dim]));
        // The sample sitting exactly on the top edge belongs to the last bin.
        if (static_cast<double>(top) * widths[dim] >= hi - lo && top > 0) top -= 1;
        max_index[dim] = top;
    }

    if (result.degenerate_dims.size() == d) {
        result.all_degenerate = true;
        result.value = 0.0;
        result.occupied_bins = 1;
        return result;
    }

    std::map<std::vector<std::int64_t>, std::int64_t> bins;
    std::vector<std::int64_t> key;
    key.reserve(d);
    for (std::size_t i = 0; i < n; ++i) {
        key.clear();
        for (std::size_t dim = 0; dim < d; ++dim) {
            if (!active[dim]) continue;
            auto idx = static_cast<std::int64_t>(
                std::floor((embeddings.values(i, dim) - mins[dim]) / widths[dim]));
            idx = std::clamp<std::int64_t>(idx, 0, max_index[dim]);
            key.push_back(idx);
        }
        ++bins[key];
    }

    double h = 0.0;
    for (const auto& [coords, count] : bins) {
        const double p = static_cast<double>(count) / static_cast<double>(n);
        h -= p * std::log(p);
    }
    result.value = h;
    result.occupied_bins = bins.size();
    return result;
}

} // namespace emblens
