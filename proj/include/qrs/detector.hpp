#pragma once

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qrs/core.hpp"
#include "qrs/wire.hpp"

namespace qrs::detector {

class StationOffPath : public std::runtime_error {
public:
    explicit StationOffPath(StationId id);
};

struct ProbeResult {
    bool ok = true;
    FlowSpec failed_qos;  // the unmet requirement when !ok
};

/// QoS test for one station: the requirement fails when the station is down
/// or its bandwidth available to this flow is below the required rate.
ProbeResult probe_station(const Station& station, const FlowSpec& required);

/// Same test, guarded: the station must lie on the detector's path.
ProbeResult probe_station(const DetectorState& state, const Station& station,
                          const FlowSpec& required);

struct BatchConfig {
    bool enabled = false;
    std::size_t max_batch = 8;
};

/// Detector runtime: component state, walk cursor, and the alarm entries
/// accumulated in batch mode.
struct Detector {
    DetectorState state;
    AgentCursor cursor;
    std::vector<wire::DetectorAlarm> pending;
};

/// Path index the next step will probe.
std::size_t next_probe_index(const Detector& det);

/// Advances the walk one station and probes it. `view` must be the station
/// at next_probe_index as this flow sees it. Emits a DetectorAlarm per
/// failure, or batches entries and flushes them as one CumulativeAlarm at
/// sweep end / max_batch. Probing continues past failed stations.
std::vector<wire::Message> detector_step(Detector& det, double now, const Station& view,
                                         const BatchConfig& batch);

/// Flushes whatever is pending (flow end, or forced flush).
std::optional<wire::Message> flush_pending(Detector& det);

}  // namespace qrs::detector
