#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "rng.hpp"

namespace emblens {
namespace {

void unit_direction(Rng& rng, std::span<double> out) {
    double len = 0.0;
    do {
        for (double& v : out) v = rng.normal();
        len = norm(out);
    } while (len <= 1e-12);
    for (double& v : out) v /= len;
}

} // namespace

std::vector<double> linear_schedule(std::size_t n_milestones) {
    std::vector<double> schedule(n_milestones);
    for (std::size_t m = 0; m < n_milestones; ++m)
        schedule[m] = static_cast<double>(m) / static_cast<double>(n_milestones - 1);
    return schedule;
}

std::vector<double> geometric_schedule(std::size_t n_milestones, double sigma_start,
                                       double sigma_end) {
    // Choose t_m so that lerp(sigma_start, sigma_end, t_m) decays by a fixed
    // ratio per milestone.
    const double ratio = std::pow(sigma_end / sigma_start,
                                  1.0 / static_cast<double>(n_milestones - 1));
    std::vector<double> schedule(n_milestones);
    for (std::size_t m = 0; m < n_milestones; ++m)
        schedule[m] = sigma_start *
                      (1.0 - std::pow(ratio, static_cast<double>(m))) /
                      (sigma_start - sigma_end);
    schedule.front() = 0.0;
    schedule.back() = 1.0;
    return schedule;
}

std::vector<Milestone> generate_trajectory(const SynthConfig& config) {
    if (config.n_classes < 1 || config.n_classes > config.n_samples)
        fail(ErrorCode::invalid, "synth requires 1 <= n_classes <= n_samples");
    if (config.n_milestones < 2)
        fail(ErrorCode::invalid, "synth requires at least 2 milestones");
    if (!(config.within_sigma_end < config.within_sigma_start))
        fail(ErrorCode::invalid, "synth requires within_sigma_end < within_sigma_start");
    if (config.within_sigma_end <= 0.0 || config.between_scale <= 0.0)
        fail(ErrorCode::invalid, "synth scales must be positive");
    for (double rate : config.outlier_rates)
        if (rate < 0.0 || rate >= 1.0)
            fail(ErrorCode::invalid, "synth outlier rates must lie in [0, 1)");

    std::vector<double> schedule = config.t_schedule;
    if (schedule.empty())
        schedule = geometric_schedule(config.n_milestones, config.within_sigma_start,
                                      config.within_sigma_end);
    if (schedule.size() != config.n_milestones)
        fail(ErrorCode::invalid, "synth t schedule length must equal n_milestones");
    for (std::size_t m = 0; m < schedule.size(); ++m) {
        if (schedule[m] < 0.0 || schedule[m] > 1.0)
            fail(ErrorCode::invalid, "synth t schedule values must lie in [0, 1]");
        if (m > 0 && schedule[m] < schedule[m - 1])
            fail(ErrorCode::invalid, "synth t schedule must be non-decreasing");
    }

    const std::size_t n = config.n_samples;
    const std::size_t d = config.dim;
    const std::size_t k = config.n_classes;

    // Class centers drawn once, uniformly on a sphere of radius between_scale.
    Matrix centers(k, d);
    {
        Rng rng(derive_seed(config.seed, "synth.centers"));
        for (std::size_t c = 0; c < k; ++c) {
            unit_direction(rng, centers.row(c));
            for (double& v : centers.row(c)) v *= config.between_scale;
        }
    }

    // Interleaved labels give each class floor(n/k) or ceil(n/k) samples.
    std::vector<std::int32_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<std::int32_t>(i % k);

    std::vector<Milestone> milestones;
    milestones.reserve(config.n_milestones);
    for (std::size_t m = 0; m < config.n_milestones; ++m) {
        const double t = schedule[m];
        const double sigma =
            config.within_sigma_start + t * (config.within_sigma_end - config.within_sigma_start);

        Milestone milestone;
        char id[24];
        std::snprintf(id, sizeof id, "m%03zu", m);
        milestone.id = id;
        milestone.epoch = static_cast<std::int64_t>(m) * config.epoch_step;

        EmbeddingSet embeddings;
        embeddings.milestone_id = milestone.id;
        embeddings.values = Matrix(n, d);
        Rng rng(derive_seed(config.seed, "synth.milestone", m));
        for (std::size_t i = 0; i < n; ++i) {
            const auto center = centers.row(static_cast<std::size_t>(labels[i]));
            auto row = embeddings.values.row(i);
            for (std::size_t j = 0; j < d; ++j) row[j] = center[j] + sigma * rng.normal();
        }

        const double rate = m < config.outlier_rates.size() ? config.outlier_rates[m] : 0.0;
        if (rate > 0.0) {
            const auto count = static_cast<std::size_t>(
                std::floor(rate * static_cast<double>(n)));
            if (count > 0)
                embeddings = inject_outliers(embeddings, count, config.outlier_radius_factor,
                                             derive_seed(config.seed, "synth.outliers", m));
        }

        // Reference metric: nearest-center accuracy measured on the points
        // as generated (outliers included).
        std::size_t correct = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = embeddings.values.row(i);
            std::size_t best = 0;
            double best_d2 = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d2 = squared_distance(row, centers.row(c));
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = c;
                }
            }
            if (static_cast<std::int32_t>(best) == labels[i]) ++correct;
        }
        milestone.reference_value = static_cast<double>(correct) / static_cast<double>(n);

        milestone.embeddings = std::move(embeddings);
        milestone.ground_truth = partition_from_labels(labels);
        milestone.ground_truth->k = static_cast<std::int32_t>(k);
        milestones.push_back(std::move(milestone));
    }
    return milestones;
}

EmbeddingSet inject_outliers(const EmbeddingSet& embeddings, std::size_t count,
                             double radius_factor, std::uint64_t seed) {
    const std::size_t n = embeddings.n();
    if (count >= n)
        fail(ErrorCode::invalid, "inject_outliers requires count < n");
    EmbeddingSet result = embeddings;
    if (count == 0) return result;

    double max_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        max_norm = std::max(max_norm, norm(embeddings.values.row(i)));
    const double radius = radius_factor * max_norm;

    // Seeded choice of distinct rows: partial Fisher-Yates over the index set.
    Rng rng(derive_seed(seed, "outliers"));
    std::vector<std::size_t> indices(n);
    for (std::size_t i = 0; i < n; ++i) indices[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + rng.uniform_index(n - i);
        std::swap(indices[i], indices[j]);
    }

    for (std::size_t i = 0; i < count; ++i) {
        auto row = result.values.row(indices[i]);
        unit_direction(rng, row);
        for (double& v : row) v *= radius;
    }
    return result;
}

} // namespace emblens
