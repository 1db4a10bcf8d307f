#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qrs {

using StationId = std::uint32_t;

enum class StationKind : std::uint8_t { host, router };

/// Service class of a flow. The numeric values are part of the wire format.
enum class Priority : std::uint8_t {
    interactive = 0,
    streaming = 1,
    excellent_effort = 2,
    best_effort = 3,
};

/// A node in the topology. `capacity_bps` is the bandwidth the reservation
/// ledger may hand out; `available_bps` is what is currently unreserved.
/// 0 <= available <= capacity holds at all times.
struct Station {
    StationId id = 0;
    StationKind kind = StationKind::host;
    std::uint64_t capacity_bps = 0;
    std::uint64_t available_bps = 0;
    bool up = true;

    bool operator==(const Station&) const = default;
};

/// Undirected link with symmetric bandwidth; queues are per direction.
struct Link {
    StationId a = 0;
    StationId b = 0;
    std::uint64_t bandwidth_bps = 0;
    double prop_delay_s = 0.0;
    std::uint32_t queue_capacity = 1;

    bool operator==(const Link&) const = default;
};

struct Topology {
    std::vector<Station> stations;
    std::vector<Link> links;

    bool has_station(StationId id) const { return id < stations.size(); }
    const Station& station(StationId id) const { return stations[id]; }
    Station& station(StationId id) { return stations[id]; }

    /// Index of the link joining a and b, in either orientation.
    std::optional<std::size_t> link_between(StationId a, StationId b) const;

    /// Neighbor ids of `id`, ascending.
    std::vector<StationId> neighbors(StationId id) const;
};

/// The QoS a flow requires from every station it crosses.
/// Jitter bound is kept in microseconds; that is also its wire precision.
struct FlowSpec {
    std::uint64_t rate_bps = 0;
    std::uint32_t burst_bytes = 0;
    std::uint32_t jitter_bound_us = 0;
    Priority priority = Priority::best_effort;

    bool operator==(const FlowSpec&) const = default;
};

/// Ordered station list, sender first, receiver last.
struct Path {
    std::vector<StationId> stations;

    std::size_t size() const { return stations.size(); }
    bool empty() const { return stations.empty(); }
    StationId sender() const { return stations.front(); }
    StationId receiver() const { return stations.back(); }
    bool contains(StationId id) const;
    /// Position of `id` in the path, if present.
    std::optional<std::size_t> position_of(StationId id) const;

    bool operator==(const Path&) const = default;
};

/// Total order on paths: hop count first, then station sequence.
bool path_less(const Path& lhs, const Path& rhs);

/// Positional decomposition of an old/new path pair.
/// `h` counts positions where the paths differ and both sides exist;
/// `k` counts positions where they agree. Tail stations of the longer
/// path are appended to its diff table without a counterpart.
struct DiffResult {
    std::vector<StationId> same;
    std::vector<StationId> diff1;  // from the old path
    std::vector<StationId> diff2;  // from the new path
    std::uint32_t h = 0;
    std::uint32_t k = 0;

    bool operator==(const DiffResult&) const = default;
};

/// Walk state of the two path-visiting agents. `sw` and `sc` are cumulative
/// visit counts since flow start (the probe position is sw mod path length),
/// so sw - sc is always well defined and sw >= sc. `tc_s` is carried in the
/// component state but no recovery step consumes it.
struct AgentCursor {
    std::uint64_t sw = 0;
    std::uint64_t sc = 0;
    double tr_s = 0.010;
    double tc_s = 0.0;

    bool operator==(const AgentCursor&) const = default;
};

/// Connector-side record for one stream.
struct ConnectorState {
    std::uint32_t connector_id = 0;
    std::vector<StationId> station_addresses;
    std::vector<double> visit_times;  // one slot per path station
    std::uint32_t analyzer_id = 0;
    StationId analyzer_address = 0;
    std::uint32_t stream_id = 0;
    std::uint8_t detector_flag = 0;
    std::uint32_t rsvp_handle = 0;
};

/// Analyzer-side record for one stream.
struct AnalyzerState {
    std::uint32_t connector_id = 0;
    std::uint32_t analyzer_id = 0;
    StationId connector_address = 0;
    std::uint32_t rsvp_handle = 0;
    std::vector<StationId> same_table;
    std::vector<StationId> diff1_table;
    std::vector<StationId> diff2_table;
    std::uint8_t connector_flag = 0;
};

/// Detector-side record for one stream. `required_qos` holds one spec per
/// path station, |required_qos| == |path|.
struct DetectorState {
    std::uint32_t detector_id = 0;
    std::uint32_t connector_id = 0;
    StationId connector_address = 0;
    std::vector<FlowSpec> required_qos;
    Path path;
    std::uint8_t connector_flag = 0;
    std::uint8_t qos_test_value = 0;
};

/// True iff `path` satisfies all path invariants against `topo`:
/// length >= 2, every station exists, consecutive stations are linked,
/// and no station repeats.
bool validate_path(const Path& path, const Topology& topo);

}  // namespace qrs
