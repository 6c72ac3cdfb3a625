#include <doctest.h>

#include <cmath>

#include "emblens/partition_metrics.hpp"
#include "emblens/rng.hpp"
#include "emi_oracle.hpp"

using namespace emblens;

namespace {

Partition make_partition(std::vector<std::int32_t> labels, std::int32_t k = 0) {
    Partition p = partition_from_labels(std::move(labels));
    if (k > p.k) p.k = k;
    return p;
}

Partition random_partition(std::size_t n, std::int32_t k, Rng& rng) {
    std::vector<std::int32_t> labels(n);
    for (auto& label : labels)
        label = static_cast<std::int32_t>(rng.uniform_index(static_cast<std::uint64_t>(k)));
    Partition p;
    p.assignments = std::move(labels);
    p.k = k;
    return p;
}

} // namespace

TEST_SUITE("partition_metrics") {

TEST_CASE("contingency counts joint occurrences") {
    const auto p = make_partition({0, 0, 1, 1});
    const auto table1 = contingency(p, make_partition({0, 0, 1, 1}));
    CHECK(table1.at(0, 0) == 2);
    CHECK(table1.at(0, 1) == 0);
    CHECK(table1.at(1, 0) == 0);
    CHECK(table1.at(1, 1) == 2);

    const auto table2 = contingency(p, make_partition({1, 1, 0, 0}));
    CHECK(table2.at(0, 0) == 0);
    CHECK(table2.at(0, 1) == 2);
    CHECK(table2.at(1, 0) == 2);
    CHECK(table2.at(1, 1) == 0);

    const auto table3 = contingency(p, make_partition({0, 1, 0, 1}));
    CHECK(table3.at(0, 0) == 1);
    CHECK(table3.at(0, 1) == 1);
    CHECK(table3.at(1, 0) == 1);
    CHECK(table3.at(1, 1) == 1);

    CHECK_THROWS_AS(contingency(p, make_partition({0, 1})), Error);
}

TEST_CASE("partition entropy") {
    CHECK(partition_entropy(make_partition({2, 2, 2, 2}, 3)) == 0.0);
    CHECK(partition_entropy(make_partition({0, 1, 2, 3})) ==
          doctest::Approx(std::log(4.0)).epsilon(1e-14));
    // -(0.75 ln 0.75 + 0.25 ln 0.25), evaluated directly from the formula.
    CHECK(partition_entropy(make_partition({0, 0, 0, 1})) ==
          doctest::Approx(0.5623351446188083).epsilon(1e-12));
}

TEST_CASE("mutual information on worked tables") {
    CHECK(mutual_information(table_from_counts(2, 2, {2, 0, 0, 2})) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-13));
    CHECK(mutual_information(table_from_counts(2, 2, {1, 1, 1, 1})) == 0.0);
    // Direct Eq. evaluation over the 2x2 joint distribution of [[2,1],[0,1]].
    CHECK(mutual_information(table_from_counts(2, 2, {2, 1, 0, 1})) ==
          doctest::Approx(0.21576155433883565).epsilon(1e-12));
}

TEST_CASE("expected mutual information against the enumeration oracle") {
    // Single-cluster marginals admit exactly one table, which carries no
    // information.
    CHECK(expected_mutual_information(table_from_counts(1, 1, {5})) == 0.0);

    // Both feasible tables for marginals (1,1) x (1,1) are permutation
    // matrices with I = ln 2, so the expectation is ln 2 as well.
    const double oracle_11 = test::emi_enumeration_oracle({1, 1}, {1, 1});
    CHECK(oracle_11 == doctest::Approx(std::log(2.0)).epsilon(1e-13));
    CHECK(expected_mutual_information(table_from_counts(2, 2, {1, 0, 0, 1})) ==
          doctest::Approx(oracle_11).epsilon(1e-12));

    // The fixed-x shortcut agrees with the full double enumeration.
    for (const auto& [a, b] : std::vector<std::pair<std::vector<std::int64_t>,
                                                    std::vector<std::int64_t>>>{
             {{2, 1}, {1, 2}},
             {{2, 2}, {3, 1}},
             {{1, 1, 2}, {2, 2}},
             {{3, 1}, {2, 1, 1}},
         }) {
        CHECK(test::emi_enumeration_oracle(a, b) ==
              doctest::Approx(test::emi_double_enumeration(a, b)).epsilon(1e-12));
    }

    // Sweep all marginal shapes with up to 3 labels per side for n <= 5; the
    // full n <= 7 sweep runs in the acceptance suite.
    for (std::int64_t n = 1; n <= 5; ++n) {
        std::vector<std::vector<std::int64_t>> marginals;
        for (std::int64_t a0 = 0; a0 <= n; ++a0)
            for (std::int64_t a1 = 0; a1 + a0 <= n; ++a1)
                marginals.push_back({a0, a1, n - a0 - a1});
        for (const auto& a : marginals) {
            for (const auto& b : marginals) {
                std::vector<int> x, y;
                for (std::size_t label = 0; label < 3; ++label) {
                    x.insert(x.end(), static_cast<std::size_t>(a[label]),
                             static_cast<int>(label));
                    y.insert(y.end(), static_cast<std::size_t>(b[label]),
                             static_cast<int>(label));
                }
                Partition px, py;
                px.assignments.assign(x.begin(), x.end());
                px.k = 3;
                py.assignments.assign(y.begin(), y.end());
                py.k = 3;
                const auto table = contingency(px, py);
                CHECK(expected_mutual_information(table) ==
                      doctest::Approx(test::emi_enumeration_oracle(a, b)).epsilon(1e-9));
                if (!x.empty())
                    CHECK(mutual_information(table) ==
                          doctest::Approx(test::direct_mi(x, y, 3, 3)).epsilon(1e-9).scale(1.0));
            }
        }
    }
}

TEST_CASE("AMI of a partition against itself is 1") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = random_partition(30, 4, rng);
        CHECK(adjusted_mutual_information(p, p) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("AMI is invariant under bijective relabeling") {
    Rng rng(11);
    const auto p = random_partition(40, 5, rng);
    Partition relabeled = p;
    for (auto& a : relabeled.assignments) a = (a + 2) % 5;
    CHECK(adjusted_mutual_information(p, relabeled) == doctest::Approx(1.0).epsilon(1e-12));

    const auto q = random_partition(40, 3, rng);
    const double base = adjusted_mutual_information(p, q);
    Partition q_relabeled = q;
    for (auto& a : q_relabeled.assignments) a = (a + 1) % 3;
    CHECK(adjusted_mutual_information(p, q_relabeled) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("AMI of independent partitions is near zero in expectation") {
    Rng rng(13);
    double total = 0.0;
    const int trials = 200;
    for (int trial = 0; trial < trials; ++trial) {
        const auto p = random_partition(500, 2, rng);
        const auto q = random_partition(500, 2, rng);
        total += adjusted_mutual_information(p, q);
    }
    CHECK(std::fabs(total / trials) < 0.03);
}

TEST_CASE("degenerate denominators") {
    // Single-cluster ground truth: any non-trivial clustering carries no
    // information about it, a single-cluster clustering matches it exactly.
    const auto gt = make_partition({0, 0, 0, 0});
    CHECK(std::fabs(adjusted_mutual_information(make_partition({0, 1, 0, 1}), gt)) < 1e-12);
    CHECK(adjusted_mutual_information(make_partition({1, 1, 1, 1}, 2), gt) == 1.0);
}

TEST_CASE("symmetry and bounds") {
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const auto p = random_partition(25, 3, rng);
        const auto q = random_partition(25, 4, rng);
        const auto pq = contingency(p, q);
        const auto qp = contingency(q, p);

        const double mi = mutual_information(pq);
        CHECK(mi == doctest::Approx(mutual_information(qp)).epsilon(1e-12));
        CHECK(expected_mutual_information(pq) ==
              doctest::Approx(expected_mutual_information(qp)).epsilon(1e-12));
        CHECK(adjusted_mutual_information(p, q) ==
              doctest::Approx(adjusted_mutual_information(q, p)).epsilon(1e-12));

        const double hp = partition_entropy(p);
        const double hq = partition_entropy(q);
        CHECK(mi >= 0.0);
        CHECK(mi <= std::min(hp, hq) + 1e-12);
        CHECK(adjusted_mutual_information(p, q) <= 1.0 + 1e-12);
    }
}

TEST_CASE("clustering agreement on a strict refinement") {
    // c2 splits each c1 cluster exactly in half (n=8, k1=2).
    const auto c1 = make_partition({0, 0, 0, 0, 1, 1, 1, 1});
    const auto c2 = make_partition({0, 0, 1, 1, 2, 2, 3, 3});
    const double agreement = clustering_agreement(c1, c2);
    CHECK(agreement == doctest::Approx(adjusted_mutual_information(c1, c2)).epsilon(1e-15));

    // Same value through the enumeration oracle path at n=8.
    const auto table = contingency(c1, c2);
    const double emi = test::emi_enumeration_oracle({4, 4}, {2, 2, 2, 2});
    CHECK(expected_mutual_information(table) == doctest::Approx(emi).epsilon(1e-9));
    const double info = mutual_information(table);
    const double denom =
        0.5 * (partition_entropy(c1) + partition_entropy(c2)) - emi;
    CHECK(agreement == doctest::Approx((info - emi) / denom).epsilon(1e-9));

    CHECK(clustering_agreement(c1, c1) == 1.0);
}

} // TEST_SUITE
