#ifndef EMBLENS_PIPELINE_HPP
#define EMBLENS_PIPELINE_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "types.hpp"

namespace emblens {

struct MetricValue {
    double value = 0.0;
    std::vector<std::string> flags;
};

// Canonical metric order used by series assembly and the CSV rows.
extern const std::vector<std::string> kMetricOrder;

struct MilestoneRecord {
    std::string milestone_id;
    std::int64_t epoch = 0;
    std::uint64_t seed = 0; // per-milestone derived seed
    std::string reducer_used;
    std::vector<std::pair<std::string, MetricValue>> metrics; // canonical order
    bool failed = false;

    const MetricValue* find(const std::string& name) const;
};

struct CorrelationVariant {
    bool defined = false;
    double r = 0.0;
    double p = 1.0;
    std::size_t n = 0;
    std::string significance = "undefined"; // positive | negative | not-significant
};

struct CorrelationEntry {
    std::string metric;
    CorrelationVariant with_init;
    CorrelationVariant without_init;
};

struct TrajectoryReport {
    std::string run_id;
    std::string manifest_path;
    EvalSettings settings;
    std::string reference_metric; // empty when the run is series-only
    std::vector<MilestoneRecord> records;
    std::vector<CorrelationEntry> correlations;
    std::vector<std::string> failures;
};

// Full per-milestone pipeline: reduce, cluster at k1 and 2*k1, then the
// label-free metrics, plus the label-based metrics and probes when ground
// truth is present. Deterministic given (milestone, settings).
MilestoneRecord evaluate_milestone(const Milestone& milestone, const EvalSettings& settings);

// Both correlation variants (all milestones, and epoch > 0 only) of every
// complete metric series against the reference series.
std::vector<CorrelationEntry> correlate_records(const std::vector<MilestoneRecord>& records,
                                                const std::string& reference_metric);

// Evaluates every manifest milestone (in parallel across `jobs` workers,
// with identical output regardless of job count) and correlates against the
// reference chosen by settings.reference.
TrajectoryReport evaluate_run(const RunManifest& manifest, const std::string& manifest_path,
                              const EvalSettings& settings, std::size_t jobs);

// Deterministic serializations. The structured form round-trips exactly.
std::string report_to_json(const TrajectoryReport& report);
std::string report_to_csv(const TrajectoryReport& report);
std::string report_summary(const TrajectoryReport& report);
TrajectoryReport report_from_json(const std::string& text);

} // namespace emblens

#endif
