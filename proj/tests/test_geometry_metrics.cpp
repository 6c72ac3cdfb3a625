#include <doctest.h>

#include <cmath>

#include "emblens/geometry_metrics.hpp"
#include "emblens/rng.hpp"
#include "emblens/synth.hpp"
#include "silhouette_reference.hpp"
#include "test_helpers.hpp"

using namespace emblens;

namespace {

EmbeddingSet from_rows(std::vector<std::vector<double>> rows) {
    EmbeddingSet set;
    const std::size_t n = rows.size();
    const std::size_t d = rows.front().size();
    set.values = Matrix(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) set.values(i, j) = rows[i][j];
    return set;
}

} // namespace

TEST_SUITE("geometry_metrics") {

TEST_CASE("four-point worked example, from the per-point hand evaluation") {
    const auto set = from_rows({{0, 0}, {0, 1}, {10, 10}, {10, 11}});
    const auto p = partition_from_labels({0, 0, 1, 1});

    const auto per_sample = per_sample_silhouettes(set, p);
    REQUIRE(per_sample.size() == 4);
    for (double s : per_sample) {
        CHECK(s > 0.9);
        CHECK(s < 0.95);
    }
    // Corner points: a = 1, b = (sqrt(200) + sqrt(221)) / 2.
    const double b_corner = (std::sqrt(200.0) + std::sqrt(221.0)) / 2.0;
    CHECK(per_sample[0] == doctest::Approx((b_corner - 1.0) / b_corner).epsilon(1e-12));
    // Inner points: b = (sqrt(181) + sqrt(200)) / 2.
    const double b_inner = (std::sqrt(181.0) + std::sqrt(200.0)) / 2.0;
    CHECK(per_sample[1] == doctest::Approx((b_inner - 1.0) / b_inner).epsilon(1e-12));

    const double overall = silhouette(set, p);
    double mean = 0.0;
    for (double s : per_sample) mean += s;
    mean /= 4.0;
    CHECK(overall == doctest::Approx(mean).epsilon(1e-13));
    CHECK(overall == doctest::Approx(0.9292895427118657).epsilon(1e-12));
    CHECK(overall == doctest::Approx(test::silhouette_reference(set, p)).epsilon(1e-12));
}

TEST_CASE("silhouette matches the naive reference on random instances") {
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 20 + rng.uniform_index(180);
        const auto k = static_cast<std::int32_t>(2 + rng.uniform_index(7));
        EmbeddingSet set;
        set.values = Matrix(n, 3);
        for (double& v : set.values.data()) v = rng.uniform(-5.0, 5.0);
        Partition p;
        p.assignments.resize(n);
        p.k = k;
        // Force at least two non-empty clusters.
        for (std::size_t i = 0; i < n; ++i)
            p.assignments[i] = static_cast<std::int32_t>(
                i < 2 ? i : rng.uniform_index(static_cast<std::uint64_t>(k)));
        CHECK(silhouette(set, p) ==
              doctest::Approx(test::silhouette_reference(set, p)).epsilon(1e-9));
    }
}

TEST_CASE("interleaved clusters from one distribution score near zero") {
    Rng rng(29);
    EmbeddingSet set;
    set.values = Matrix(400, 2);
    for (double& v : set.values.data()) v = rng.normal();
    std::vector<std::int32_t> labels(400);
    for (std::size_t i = 0; i < labels.size(); ++i)
        labels[i] = static_cast<std::int32_t>(i % 2);
    const auto p = partition_from_labels(std::move(labels));
    CHECK(std::fabs(silhouette(set, p)) < 0.1);
}

TEST_CASE("singleton clusters contribute exactly zero") {
    const auto set = from_rows({{0, 0}, {0, 1}, {5, 5}, {9, 9}});
    const auto p = partition_from_labels({0, 0, 1, 2});
    const auto per_sample = per_sample_silhouettes(set, p);
    CHECK(per_sample[2] == 0.0);
    CHECK(per_sample[3] == 0.0);
    for (double s : per_sample) {
        CHECK(s >= -1.0);
        CHECK(s <= 1.0);
    }
}

TEST_CASE("silhouette requires two non-empty clusters and matching lengths") {
    const auto set = from_rows({{0, 0}, {1, 1}});
    CHECK_THROWS_AS(silhouette(set, partition_from_labels({0, 0})), Error);
    CHECK_THROWS_AS(silhouette(set, partition_from_labels({0, 1, 0})), Error);
}

TEST_CASE("silhouette is invariant under isometries") {
    Partition labels;
    auto set = test::make_blobs(test::two_far_centers(3, 8.0), 60, 1.0, 31, &labels);
    const double base = silhouette(set, labels);

    // Rotate in the (0,1) plane and translate.
    const double angle = 0.7;
    EmbeddingSet moved = set;
    for (std::size_t i = 0; i < set.n(); ++i) {
        const double x = set.values(i, 0), y = set.values(i, 1);
        moved.values(i, 0) = std::cos(angle) * x - std::sin(angle) * y + 3.0;
        moved.values(i, 1) = std::sin(angle) * x + std::cos(angle) * y - 11.0;
        moved.values(i, 2) = set.values(i, 2) + 5.0;
    }
    CHECK(silhouette(moved, labels) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("histogram entropy of identical samples is zero and flagged") {
    EmbeddingSet set;
    set.values = Matrix(10, 3, 2.5);
    const auto result = histogram_entropy(set, {});
    CHECK(result.value == 0.0);
    CHECK(result.all_degenerate);
    CHECK(result.degenerate_dims.size() == 3);
}

TEST_CASE("uniform occupation of 8 bins gives ln 8") {
    // 2 bins per dimension in 3 dimensions; samples sit at bin centers so
    // no boundary effects apply, 5 samples in each of the 8 cells.
    EmbeddingSet set;
    const std::size_t per_cell = 5;
    set.values = Matrix(8 * per_cell, 3);
    std::size_t row = 0;
    for (int cx = 0; cx < 2; ++cx)
        for (int cy = 0; cy < 2; ++cy)
            for (int cz = 0; cz < 2; ++cz)
                for (std::size_t r = 0; r < per_cell; ++r) {
                    set.values(row, 0) = cx;
                    set.values(row, 1) = cy;
                    set.values(row, 2) = cz;
                    ++row;
                }
    // Per dimension: values {0, 1}, sigma = 0.5, width 0.4 * 0.5 = 0.2, so
    // 0 lands in bin 0 and 1 clamps into the top bin: two bins per axis.
    const auto result = histogram_entropy(set, {0.4});
    CHECK(result.occupied_bins == 8);
    CHECK(result.value == doctest::Approx(std::log(8.0)).epsilon(1e-12));
}

TEST_CASE("entropy is invariant under per-dimension affine rescaling") {
    Rng rng(37);
    EmbeddingSet set;
    set.values = Matrix(300, 3);
    for (double& v : set.values.data()) v = rng.normal();

    const auto base = histogram_entropy(set, {0.4});
    EmbeddingSet scaled = set;
    const double alpha[3] = {2.0, 0.5, 7.3};
    const double beta[3] = {0.0, 4.2, -1.9};
    for (std::size_t i = 0; i < set.n(); ++i)
        for (std::size_t j = 0; j < 3; ++j)
            scaled.values(i, j) = alpha[j] * set.values(i, j) + beta[j];
    const auto transformed = histogram_entropy(scaled, {0.4});
    CHECK(transformed.occupied_bins == base.occupied_bins);
    CHECK(transformed.value == doctest::Approx(base.value).epsilon(1e-12));
}

TEST_CASE("entropy is bounded by log of occupied bins") {
    Rng rng(41);
    EmbeddingSet set;
    set.values = Matrix(200, 3);
    for (double& v : set.values.data()) v = rng.uniform(-1.0, 1.0);
    const auto result = histogram_entropy(set, {0.4});
    CHECK(result.value <= std::log(static_cast<double>(result.occupied_bins)) + 1e-12);
    CHECK(result.value <= std::log(200.0) + 1e-12);
}

TEST_CASE("distant outliers strictly decrease entropy") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Partition labels;
        auto set = test::make_blobs(test::two_far_centers(3, 10.0), 200, 1.0, seed, &labels);
        const double clean = histogram_entropy(set, {0.4}).value;
        const auto spiked = inject_outliers(set, 5, 50.0, seed);
        const double spiked_entropy = histogram_entropy(spiked, {0.4}).value;
        CHECK(spiked_entropy < clean);
    }
}

TEST_CASE("degenerate dimensions are dropped and flagged") {
    Rng rng(43);
    EmbeddingSet set;
    set.values = Matrix(50, 3);
    for (std::size_t i = 0; i < 50; ++i) {
        set.values(i, 0) = rng.normal();
        set.values(i, 1) = 7.0; // constant
        set.values(i, 2) = rng.normal();
    }
    const auto result = histogram_entropy(set, {0.4});
    CHECK(result.degenerate_dims == std::vector<std::size_t>{1});
    CHECK_FALSE(result.all_degenerate);
    CHECK(result.value > 0.0);
}

} // TEST_SUITE
