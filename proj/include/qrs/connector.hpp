#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <variant>
#include <vector>

#include "qrs/core.hpp"
#include "qrs/wire.hpp"

namespace qrs::connector {

class NoRouterAvailable : public std::runtime_error {
public:
    NoRouterAvailable();
};

/// Closest router strictly upstream of `failed` on the path; when the path
/// has none, the lowest-id router adjacent to `failed` in the topology.
StationId nearest_router(StationId failed, const Path& path, const Topology& topo);

enum class CloseReason : std::uint8_t {
    recovered_sent,   // SenderUpdate issued
    no_alternative,   // routing exhausted / nothing viable
    window_expired,   // recovery window ran out
    no_router,        // no router reachable to ask
};

/// One recovery attempt: opened by an alarm, closed by SenderUpdate,
/// NoAlternativePath, or RecoveryWindowExpired.
struct Episode {
    bool open = false;
    std::uint32_t serial = 0;
    StationId failed = 0;
    double opened_at = 0.0;
    double deadline = 0.0;
    std::set<StationId> rejected_stations;
    std::vector<Path> rejected_paths;
    std::optional<Path> candidate;  // awaiting analyzer verdict
    std::uint32_t route_requests = 0;
};

struct Connector {
    ConnectorState state;
    Episode episode;
    std::uint64_t alarms_seen = 0;
    std::uint64_t alarms_ignored = 0;  // raised while an episode was open
};

struct FlagCheck {
    std::uint32_t serial = 0;
};
using AlarmMessage = std::variant<wire::DetectorAlarm, wire::CumulativeAlarm>;
using ConnectorEvent = std::variant<FlagCheck, AlarmMessage, wire::RouteReply, wire::AnalyzeReply>;

struct Outbound {
    wire::Message msg;
    StationId dest = 0;
};

struct StepResult {
    std::vector<Outbound> out;
    std::optional<StationId> opened;      // episode opened for this station
    std::optional<CloseReason> closed;
    std::optional<StationId> rejected_at; // candidate station that failed validation
};

struct ConnectorContext {
    const Topology* topo = nullptr;
    /// Station as this flow sees it (physical bandwidth minus other flows).
    std::function<Station(StationId)> view;
    const AgentCursor* cursor = nullptr;
};

StepResult connector_step(Connector& con, const ConnectorEvent& event, double now,
                          const ConnectorContext& ctx);

}  // namespace qrs::connector
