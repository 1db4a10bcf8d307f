#include "qrs/detector.hpp"

#include <cassert>

namespace qrs::detector {

StationOffPath::StationOffPath(StationId id)
    : std::runtime_error("StationOffPath: station " + std::to_string(id) +
                         " is not on the detector's path") {}

ProbeResult probe_station(const Station& station, const FlowSpec& required) {
    ProbeResult out;
    if (!station.up || station.available_bps < required.rate_bps) {
        out.ok = false;
        out.failed_qos = required;
    }
    return out;
}

ProbeResult probe_station(const DetectorState& state, const Station& station,
                          const FlowSpec& required) {
    if (!state.path.contains(station.id)) throw StationOffPath(station.id);
    return probe_station(station, required);
}

std::size_t next_probe_index(const Detector& det) {
    assert(!det.state.path.empty());
    return static_cast<std::size_t>((det.cursor.sw + 1) % det.state.path.size());
}

std::optional<wire::Message> flush_pending(Detector& det) {
    if (det.pending.empty()) return std::nullopt;
    wire::Message msg = wire::batch_alarms(det.pending);
    det.pending.clear();
    return msg;
}

std::vector<wire::Message> detector_step(Detector& det, double now, const Station& view,
                                         const BatchConfig& batch) {
    (void)now;
    std::vector<wire::Message> out;
    const std::size_t len = det.state.path.size();
    assert(len >= 2 && det.state.required_qos.size() == len);

    std::size_t idx = next_probe_index(det);
    det.cursor.sw += 1;
    if (det.cursor.sw > len) det.cursor.sc = det.cursor.sw - len;  // trails one sweep

    const FlowSpec& required = det.state.required_qos[idx];
    ProbeResult probe = probe_station(det.state, view, required);
    if (!probe.ok) {
        det.state.qos_test_value = 1;
        wire::DetectorAlarm alarm;
        alarm.connector_id = det.state.connector_id;
        alarm.failed_station = view.id;
        alarm.failed_qos = probe.failed_qos;
        if (batch.enabled) {
            det.pending.push_back(alarm);
            if (det.pending.size() >= batch.max_batch) {
                if (auto msg = flush_pending(det)) out.push_back(std::move(*msg));
            }
        } else {
            out.emplace_back(alarm);
        }
        // Alarm raised; reset and keep testing the remaining stations.
        det.state.qos_test_value = 0;
    }

    bool sweep_end = idx + 1 == len;
    if (sweep_end && batch.enabled) {
        if (auto msg = flush_pending(det)) out.push_back(std::move(*msg));
    }
    return out;
}

}  // namespace qrs::detector
