#include "qrs/connector.hpp"

#include <algorithm>
#include <cassert>

namespace qrs::connector {

NoRouterAvailable::NoRouterAvailable()
    : std::runtime_error("NoRouterAvailable: no router to query for alternatives") {}

StationId nearest_router(StationId failed, const Path& path, const Topology& topo) {
    auto pos = path.position_of(failed);
    assert(pos.has_value());
    for (std::size_t i = *pos; i-- > 0;) {
        StationId id = path.stations[i];
        if (topo.station(id).kind == StationKind::router) return id;
    }
    for (StationId id : topo.neighbors(failed)) {
        if (topo.station(id).kind == StationKind::router) return id;
    }
    throw NoRouterAvailable();
}

namespace {

Path old_path_of(const Connector& con) {
    return Path{con.state.station_addresses};
}

// Opens the recovery loop: flag up, window armed, first router query out.
StepResult open_episode(Connector& con, StationId failed,
                        const std::set<StationId>& extra_failures, double now,
                        const ConnectorContext& ctx) {
    StepResult result;
    Episode& ep = con.episode;
    ep.open = true;
    ep.serial += 1;
    ep.failed = failed;
    ep.opened_at = now;
    // Budget: the gap between the detector's walk and the connector's,
    // one tr per station.
    double window = static_cast<double>(ctx.cursor->sw - ctx.cursor->sc) * ctx.cursor->tr_s;
    ep.deadline = now + window;
    ep.rejected_stations = extra_failures;
    ep.rejected_stations.erase(failed);
    ep.rejected_paths.clear();
    ep.candidate.reset();
    ep.route_requests = 0;
    con.state.detector_flag = 1;
    result.opened = failed;

    try {
        StationId router = nearest_router(failed, old_path_of(con), *ctx.topo);
        wire::RouteRequest req;
        req.connector_id = con.state.connector_id;
        req.old_path = old_path_of(con);
        req.failed_station = failed;
        ep.route_requests += 1;
        result.out.push_back({req, router});
    } catch (const NoRouterAvailable&) {
        ep.open = false;
        con.state.detector_flag = 0;
        result.closed = CloseReason::no_router;
    }
    return result;
}

void close_episode(Connector& con, CloseReason reason, StepResult& result) {
    con.episode.open = false;
    con.state.detector_flag = 0;
    result.closed = reason;
}

bool viable_candidate(const Episode& ep, const Path& p) {
    if (p.contains(ep.failed)) return false;
    for (StationId id : p.stations)
        if (ep.rejected_stations.count(id)) return false;
    return std::find(ep.rejected_paths.begin(), ep.rejected_paths.end(), p) ==
           ep.rejected_paths.end();
}

}  // namespace

StepResult connector_step(Connector& con, const ConnectorEvent& event, double now,
                          const ConnectorContext& ctx) {
    StepResult result;
    Episode& ep = con.episode;

    if (const auto* check = std::get_if<FlagCheck>(&event)) {
        if (ep.open && check->serial == ep.serial && now >= ep.deadline)
            close_episode(con, CloseReason::window_expired, result);
        return result;
    }

    if (const auto* alarm = std::get_if<AlarmMessage>(&event)) {
        StationId failed = 0;
        std::set<StationId> extra;
        if (const auto* single = std::get_if<wire::DetectorAlarm>(alarm)) {
            failed = single->failed_station;
            con.alarms_seen += 1;
        } else {
            const auto& batch = std::get<wire::CumulativeAlarm>(*alarm);
            assert(!batch.entries.empty());
            failed = batch.entries.front().first;
            for (std::size_t i = 1; i < batch.entries.size(); ++i)
                extra.insert(batch.entries[i].first);
            con.alarms_seen += batch.entries.size();
        }
        if (ep.open) {
            con.alarms_ignored += 1;
            return result;
        }
        return open_episode(con, failed, extra, now, ctx);
    }

    if (const auto* reply = std::get_if<wire::RouteReply>(&event)) {
        if (!ep.open) return result;
        const Path* pick = nullptr;
        for (const Path& p : reply->alternatives) {
            if (viable_candidate(ep, p)) {
                pick = &p;
                break;
            }
        }
        if (!pick) {
            close_episode(con, CloseReason::no_alternative, result);
            return result;
        }
        ep.candidate = *pick;
        wire::AnalyzeRequest req;
        req.connector_id = con.state.connector_id;
        req.old_path = old_path_of(con);
        req.new_path = *pick;
        result.out.push_back({req, con.state.analyzer_address});
        return result;
    }

    const auto& reply = std::get<wire::AnalyzeReply>(event);
    if (!ep.open || !ep.candidate) return result;
    const Path& candidate = *ep.candidate;
    auto pfs = old_path_of(con).position_of(ep.failed);
    std::size_t from = pfs.value_or(0);

    auto required_for = [&](StationId id) {
        for (const auto& [sid, fs] : reply.per_station_qos)
            if (sid == id) return fs;
        return reply.qos_request;
    };

    // The QoS test over new-path positions PFS..M.
    for (std::size_t j = from; j < candidate.size(); ++j) {
        StationId id = candidate.stations[j];
        Station view = ctx.view(id);
        FlowSpec need = required_for(id);
        if (!view.up || view.available_bps < need.rate_bps) {
            ep.rejected_stations.insert(id);
            ep.rejected_paths.push_back(candidate);
            ep.candidate.reset();
            result.rejected_at = id;
            // Back to the router for another candidate.
            try {
                StationId router = nearest_router(ep.failed, old_path_of(con), *ctx.topo);
                wire::RouteRequest req;
                req.connector_id = con.state.connector_id;
                req.old_path = old_path_of(con);
                req.failed_station = ep.failed;
                ep.route_requests += 1;
                result.out.push_back({req, router});
            } catch (const NoRouterAvailable&) {
                close_episode(con, CloseReason::no_router, result);
            }
            return result;
        }
    }

    wire::SenderUpdate update;
    update.connector_id = con.state.connector_id;
    update.stream_id = con.state.stream_id;
    update.new_path = candidate;
    update.flowspec = reply.qos_request;
    result.out.push_back({update, old_path_of(con).sender()});
    ep.candidate.reset();
    close_episode(con, CloseReason::recovered_sent, result);
    return result;
}

}  // namespace qrs::connector
