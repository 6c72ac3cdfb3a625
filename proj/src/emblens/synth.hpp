#ifndef EMBLENS_SYNTH_HPP
#define EMBLENS_SYNTH_HPP

#include <cstdint>
#include <vector>

#include "types.hpp"

namespace emblens {

// Synthetic learning trajectory: class centers are fixed once, while the
// within-class spread shrinks from sigma_start to sigma_end across
// milestones, so the cluster structure tightens the way the conjectured
// training dynamics do.
struct SynthConfig {
    std::size_t n_samples = 2000;
    std::size_t dim = 32;
    std::size_t n_classes = 10;
    std::size_t n_milestones = 10;
    double within_sigma_start = 3.5;
    double within_sigma_end = 0.25;
    double between_scale = 5.0;
    // Progression values in [0, 1], one per milestone, non-decreasing, with
    // t=0 first and t=1 last; sigma follows lerp(start, end, t). Empty means
    // the geometric default from geometric_schedule().
    std::vector<double> t_schedule;
    // Per-milestone outlier fraction; empty means no outliers anywhere.
    std::vector<double> outlier_rates;
    double outlier_radius_factor = 50.0;
    std::int64_t epoch_step = 20;
    std::uint64_t seed = 42;
};

// Progression values that make the within-class spread decay geometrically,
// the way training losses tend to: fast early, slow late.
std::vector<double> geometric_schedule(std::size_t n_milestones, double sigma_start,
                                       double sigma_end);

// Uniformly spaced progression values.
std::vector<double> linear_schedule(std::size_t n_milestones);

// Generates the milestone sequence. Ground truth labels are attached, and
// reference_value holds the empirically measured accuracy of a
// nearest-center classifier on the generated points.
std::vector<Milestone> generate_trajectory(const SynthConfig& config);

// Replaces `count` seeded-chosen rows with points at radius_factor times
// the max row norm, in random directions.
EmbeddingSet inject_outliers(const EmbeddingSet& embeddings, std::size_t count,
                             double radius_factor, std::uint64_t seed);

} // namespace emblens

#endif
