#ifndef EMBLENS_PARTITION_METRICS_HPP
#define EMBLENS_PARTITION_METRICS_HPP

#include <cstdint>
#include <vector>

#include "types.hpp"

namespace emblens {

// Joint counts between two partitions of the same samples.
struct ContingencyTable {
    std::size_t kx = 0;
    std::size_t ky = 0;
    std::vector<std::int64_t> counts; // row-major kx * ky
    std::vector<std::int64_t> row_marginals;
    std::vector<std::int64_t> col_marginals;
    std::int64_t n = 0;

    std::int64_t at(std::size_t i, std::size_t j) const { return counts[i * ky + j]; }
};

ContingencyTable contingency(const Partition& p, const Partition& q);

ContingencyTable table_from_counts(std::size_t kx, std::size_t ky,
                                   std::vector<std::int64_t> counts);

// Shannon entropy of the label distribution, in nats.
double partition_entropy(const Partition& p);
double entropy_from_counts(const std::vector<std::int64_t>& counts, std::int64_t n);

// Mutual information of the joint distribution counts/n, in nats.
double mutual_information(const ContingencyTable& table);

// E[I(X*;Y*)] under the hypergeometric model with the table's marginals.
double expected_mutual_information(const ContingencyTable& table);

// AMI = (I - E[I]) / (mean(H(p), H(q)) - E[I]), clamped to [-1, 1].
// A degenerate denominator (|den| < 1e-12) yields 1 when the partitions are
// identical up to relabeling and 0 otherwise.
double adjusted_mutual_information(const Partition& p, const Partition& q);

// AMI(C1; C2): the label-free consistency metric between two clustering runs.
double clustering_agreement(const Partition& c1, const Partition& c2);

// AMI(C1; C_GT): the label-dependent baseline.
double ami_vs_ground_truth(const Partition& c1, const Partition& gt);

// True when a bijective relabeling maps p onto q exactly.
bool identical_up_to_relabeling(const Partition& p, const Partition& q);

} // namespace emblens

#endif
