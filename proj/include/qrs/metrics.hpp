#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "qrs/trace.hpp"

namespace qrs::metrics {

class InsufficientData : public std::runtime_error {
public:
    InsufficientData();
};

/// A ratio that never becomes NaN: a zero denominator reports 1.0 with the
/// flag set instead.
struct Ratio {
    double value = 1.0;
    bool zero_denominator = true;

    static Ratio of(double num, double den) {
        if (den <= 0.0) return {1.0, true};
        return {num / den, false};
    }
    bool operator==(const Ratio&) const = default;
};

struct JitterResult {
    std::vector<double> series;  // |d_i - d_{i-1}| in delivery order
    double mean = 0.0;
};

/// Consecutive-delivery delay differences. Throws InsufficientData when
/// fewer than two packets were delivered.
JitterResult delay_jitter(const std::vector<double>& delays);

struct StreamMetrics {
    std::uint64_t generated = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::uint64_t drop_queue = 0;
    std::uint64_t drop_station = 0;  // down or degraded
    double delay_mean = 0.0;
    double delay_max = 0.0;
    bool delay_defined = false;
    double jitter_mean = 0.0;
    std::uint64_t jitter_pairs = 0;
    std::uint64_t compound_lost_bits = 0;
    std::uint32_t recovered_paths = 0;
    Ratio efficiency;  // QoS-held service-seconds / service-seconds
};

struct MetricsReport {
    std::uint32_t mode = 0;  // 0 baseline, 1 proposed
    bool batching = false;
    std::uint64_t seed = 0;
    double horizon_s = 0.0;

    StreamMetrics all;
    std::map<std::uint32_t, StreamMetrics> streams;

    // Time series, one slot per 1-second bucket.
    std::vector<std::uint64_t> loss_series;
    std::map<std::uint32_t, std::vector<std::uint64_t>> loss_series_streams;
    std::vector<Ratio> reservation_success_series;
    std::vector<double> jitter_bucket_mean;  // mean |delta delay| per bucket
    std::map<std::uint32_t, std::vector<double>> jitter_series;  // per stream, per pair

    Ratio detector_utilization;
    Ratio connector_utilization;
    Ratio analyzer_utilization;
    Ratio efficiency;  // system efficiency over all service-seconds

    std::uint64_t injected_failures = 0;
    std::uint64_t detected_failures = 0;
    std::uint64_t alarm_entries = 0;
    std::uint64_t episodes_opened = 0;
    std::uint64_t total_messages = 0;
    std::uint64_t transit_messages = 0;
    std::uint64_t audit_violations = 0;
    std::uint32_t recovered_paths = 0;
};

/// Builds the full report from a trace; pure post-processing, byte-for-byte
/// reproducible for equal traces.
MetricsReport finalize(const trace::Trace& tr);

}  // namespace qrs::metrics
