#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrs/core.hpp"
#include "qrs/metrics.hpp"
#include "qrs/trace.hpp"

namespace qrs::netsim {

/// Serialization time of `size_bytes` on a `bandwidth_bps` link.
double transmit_delay(std::uint64_t size_bytes, std::uint64_t bandwidth_bps);

enum class EventKind : std::uint8_t {
    packet_arrival,
    packet_departure,
    detector_tick,
    component_message,
    failure_inject,
    flow_start,
    flow_end,
};

/// Heap entries are processed in (time, seq) order; seq is unique.
struct Event {
    double time = 0.0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::flow_start;
};

struct Packet {
    std::uint32_t stream_id = 0;
    std::uint64_t seq_no = 0;
    std::uint32_t size_bytes = 0;
    double created = 0.0;
    StationId current_station = 0;
    std::optional<double> delivered;
};

/// FIFO tail-drop queue of one link direction.
struct LinkQueue {
    std::uint32_t capacity = 1;
    std::deque<std::uint32_t> items;

    bool enqueue(std::uint32_t packet_id) {
        if (items.size() >= capacity) return false;
        items.push_back(packet_id);
        return true;
    }
    std::optional<std::uint32_t> dequeue() {
        if (items.empty()) return std::nullopt;
        std::uint32_t id = items.front();
        items.pop_front();
        return id;
    }
};

struct FlowDef {
    StationId sender = 0;
    StationId receiver = 0;
    FlowSpec spec;
    std::uint32_t pkt_bytes = 1000;
    double start_s = 0.0;
    double stop_s = 0.0;
    std::vector<std::uint32_t> compound_deps;  // indices of dependency flows
};

struct FailureDef {
    double time_s = 0.0;
    StationId station = 0;
    bool down = false;
    std::uint64_t new_available_bps = 0;  // effective service rate when degraded
};

enum class Mode : std::uint8_t { baseline = 0, proposed = 1 };

struct Scenario {
    Topology topology;
    std::vector<FlowDef> flows;
    std::vector<FailureDef> failures;
    Mode mode = Mode::proposed;
    bool batching = false;
    std::uint64_t seed = 1;
    std::uint32_t queue_capacity = 400;
    std::uint32_t k_alternatives = 4;
    double tr_s = 0.010;
    double baseline_recovery_delay_s = 2.0;
    double horizon_s = 0.0;
    std::size_t max_batch = 8;
};

class ScenarioInvalid : public std::runtime_error {
public:
    explicit ScenarioInvalid(const std::string& what) : std::runtime_error(what) {}
};

/// Structural checks for a programmatically built scenario; file parsing
/// performs these plus key/line diagnostics.
void validate_scenario(const Scenario& sc);

struct StreamCount {
    std::uint64_t generated = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::uint64_t in_flight = 0;
};

struct RunResult {
    metrics::MetricsReport report;
    trace::Trace trace;
    std::uint64_t audit_violations = 0;
    std::map<std::uint32_t, StreamCount> counts;  // engine-side tallies
};

/// Deterministic single-threaded simulation; equal scenarios (including
/// seed) produce equal traces and reports.
RunResult run(const Scenario& sc);
metrics::MetricsReport run_report(const Scenario& sc);

}  // namespace qrs::netsim
