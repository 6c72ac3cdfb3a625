#include "partition_metrics.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace emblens {

ContingencyTable table_from_counts(std::size_t kx, std::size_t ky,
                                   std::vector<std::int64_t> counts) {
    if (counts.size() != kx * ky)
        fail(ErrorCode::invalid, "contingency counts size does not match kx*ky");
    ContingencyTable table;
    table.kx = kx;
    table.ky = ky;
    table.counts = std::move(counts);
    table.row_marginals.assign(kx, 0);
    table.col_marginals.assign(ky, 0);
    for (std::size_t i = 0; i < kx; ++i) {
        for (std::size_t j = 0; j < ky; ++j) {
            const std::int64_t c = table.counts[i * ky + j];
            if (c < 0) fail(ErrorCode::invalid, "contingency counts must be non-negative");
            table.row_marginals[i] += c;
            table.col_marginals[j] += c;
            table.n += c;
        }
    }
    if (table.n < 1) fail(ErrorCode::invalid, "contingency table must count n >= 1 samples");
    return table;
}

ContingencyTable contingency(const Partition& p, const Partition& q) {
    if (p.n() != q.n())
        fail(ErrorCode::invalid, "contingency requires partitions of equal length");
    const auto kx = static_cast<std::size_t>(p.k);
    const auto ky = static_cast<std::size_t>(q.k);
    std::vector<std::int64_t> counts(kx * ky, 0);
    for (std::size_t s = 0; s < p.n(); ++s)
        ++counts[static_cast<std::size_t>(p.assignments[s]) * ky +
                 static_cast<std::size_t>(q.assignments[s])];
    return table_from_counts(kx, ky, std::move(counts));
}

double entropy_from_counts(const std::vector<std::int64_t>& counts, std::int64_t n) {
    double h = 0.0;
    for (std::int64_t c : counts) {
        if (c <= 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(n);
        h -= p * std::log(p);
    }
    return h;
}

double partition_entropy(const Partition& p) {
    p.validate();
    return entropy_from_counts(p.label_counts(), static_cast<std::int64_t>(p.n()));
}

double mutual_information(const ContingencyTable& table) {
    const double n = static_cast<double>(table.n);
    double info = 0.0;
    for (std::size_t i = 0; i < table.kx; ++i) {
        const std::int64_t a = table.row_marginals[i];
        if (a == 0) continue;
        for (std::size_t j = 0; j < table.ky; ++j) {
            const std::int64_t c = table.at(i, j);
            if (c == 0) continue;
            const std::int64_t b = table.col_marginals[j];
            const double joint = static_cast<double>(c) / n;
            info += joint * std::log(static_cast<double>(c) * n /
                                     (static_cast<double>(a) * static_cast<double>(b)));
        }
    }
    // Rounding can leave a tiny negative residue on independent tables.
    if (info < 0.0) {
        if (info < -1e-12)
            fail(ErrorCode::invalid, "mutual information evaluated significantly below zero");
        info = 0.0;
    }
    return info;
}

double expected_mutual_information(const ContingencyTable& table) {
    const std::int64_t n = table.n;
    // log n! table; factorials overflow doubles near n = 170, logs do not.
    std::vector<double> log_fact(static_cast<std::size_t>(n) + 1, 0.0);
    for (std::int64_t i = 2; i <= n; ++i)
        log_fact[static_cast<std::size_t>(i)] =
            log_fact[static_cast<std::size_t>(i - 1)] + std::log(static_cast<double>(i));

    const double nd = static_cast<double>(n);
    const double log_n = std::log(nd);
    double expected = 0.0;
    for (std::size_t i = 0; i < table.kx; ++i) {
        const std::int64_t a = table.row_marginals[i];
        if (a == 0) continue;
        for (std::size_t j = 0; j < table.ky; ++j) {
            const std::int64_t b = table.col_marginals[j];
            if (b == 0) continue;
            const std::int64_t lo = std::max<std::int64_t>(1, a + b - n);
            const std::int64_t hi = std::min(a, b);
            const double log_const = log_fact[a] + log_fact[b] + log_fact[n - a] +
                                     log_fact[n - b] - log_fact[n];
            for (std::int64_t nij = lo; nij <= hi; ++nij) {
                const double log_prob = log_const - log_fact[nij] - log_fact[a - nij] -
                                        log_fact[b - nij] - log_fact[n - a - b + nij];
                const double term = (static_cast<double>(nij) / nd) *
                                    (log_n + std::log(static_cast<double>(nij)) -
                                     std::log(static_cast<double>(a)) -
                                     std::log(static_cast<double>(b)));
                expected += term * std::exp(log_prob);
            }
        }
    }
    return expected;
}

bool identical_up_to_relabeling(const Partition& p, const Partition& q) {
    if (p.n() != q.n()) return false;
    std::vector<std::int32_t> fwd(static_cast<std::size_t>(p.k), -1);
    std::vector<std::int32_t> bwd(static_cast<std::size_t>(q.k), -1);
    for (std::size_t s = 0; s < p.n(); ++s) {
        const auto a = static_cast<std::size_t>(p.assignments[s]);
        const auto b = static_cast<std::size_t>(q.assignments[s]);
        if (fwd[a] == -1) fwd[a] = static_cast<std::int32_t>(b);
        else if (fwd[a] != static_cast<std::int32_t>(b)) return false;
        if (bwd[b] == -1) bwd[b] = static_cast<std::int32_t>(a);
        else if (bwd[b] != static_cast<std::int32_t>(a)) return false;
    }
    return true;
}

double adjusted_mutual_information(const Partition& p, const Partition& q) {
    if (p.n() != q.n())
        fail(ErrorCode::invalid, "AMI requires partitions of equal length");
    const ContingencyTable table = contingency(p, q);
    const double info = mutual_information(table);
    const double expected = expected_mutual_information(table);
    const double hp = entropy_from_counts(table.row_marginals, table.n);
    const double hq = entropy_from_counts(table.col_marginals, table.n);
    const double denom = 0.5 * (hp + hq) - expected;
    if (std::fabs(denom) < 1e-12)
        return identical_up_to_relabeling(p, q) ? 1.0 : 0.0;
    return std::clamp((info - expected) / denom, -1.0, 1.0);
}

double clustering_agreement(const Partition& c1, const Partition& c2) {
    return adjusted_mutual_information(c1, c2);
}

double ami_vs_ground_truth(const Partition& c1, const Partition& gt) {
    return adjusted_mutual_information(c1, gt);
}

} // namespace emblens
