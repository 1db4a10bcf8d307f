#include "qrs/netsim.hpp"

#include <algorithm>
#include <cassert>
#include <queue>
#include <random>
#include <set>

#include "qrs/analyzer.hpp"
#include "qrs/connector.hpp"
#include "qrs/detector.hpp"
#include "qrs/reservation.hpp"
#include "qrs/routing.hpp"
#include "qrs/wire.hpp"

namespace qrs::netsim {

double transmit_delay(std::uint64_t size_bytes, std::uint64_t bandwidth_bps) {
    assert(bandwidth_bps > 0);
    return static_cast<double>(size_bytes) * 8.0 / static_cast<double>(bandwidth_bps);
}

namespace {

// Packets queue behind a degraded station's reduced forwarding rate; beyond
// this backlog they are shed.
constexpr double kStationBacklogLimit = 4.0;
constexpr double kReservationRetryPeriod = 1.0;

enum class Op : std::uint8_t {
    flow_start,
    flow_end,
    launch,
    link_done,
    bucket_done,
    arrival,
    tick,
    deliver_local,
    flag_check,
    rebuild,
    retry_res,
    inject,
};

EventKind kind_of(Op op) {
    switch (op) {
        case Op::flow_start: return EventKind::flow_start;
        case Op::flow_end: return EventKind::flow_end;
        case Op::launch:
        case Op::link_done:
        case Op::bucket_done: return EventKind::packet_departure;
        case Op::arrival: return EventKind::packet_arrival;
        case Op::tick: return EventKind::detector_tick;
        case Op::deliver_local:
        case Op::flag_check:
        case Op::rebuild:
        case Op::retry_res: return EventKind::component_message;
        case Op::inject: return EventKind::failure_inject;
    }
    return EventKind::component_message;
}

struct Ev {
    Event head;  // time, seq, kind
    Op op = Op::flow_start;
    std::uint32_t x = 0;
    std::uint32_t y = 0;
};

struct EvLater {
    bool operator()(const Ev& a, const Ev& b) const {
        if (a.head.time != b.head.time) return a.head.time > b.head.time;
        return a.head.seq > b.head.seq;
    }
};

// Engine-side packet: the observable fields plus routing machinery.
struct Pkt : Packet {
    std::vector<StationId> route;
    std::uint32_t hop = 0;  // index of the station the packet is at / heading to
    bool control = false;
    std::int32_t msg = -1;
};

struct LinkDirRt {
    LinkQueue data;
    std::deque<std::uint32_t> ctrl;  // control class bypasses the data queue
    bool busy = false;
    std::uint32_t in_service = 0;
};

struct LinkRt {
    LinkDirRt dir[2];
};

struct FlowRt {
    std::uint32_t id = 0;
    FlowDef def;
    double phase = 0.0;
    bool started = false;
    bool ended = false;
    std::vector<StationId> current_path;
    std::uint64_t next_seq = 0;
    StreamCount count;
    bool components_active = false;
    StationId seat = 0;  // receiver-side router where control enters the net
    detector::Detector det;
    connector::Connector con;
    analyzer::Analyzer ana;
};

class Sim {
public:
    explicit Sim(const Scenario& sc) : sc_(sc), res_(sc_.topology) {}

    RunResult run();

private:
    // -- scheduling ------------------------------------------------------
    void schedule(double t, Op op, std::uint32_t x = 0, std::uint32_t y = 0) {
        Ev ev;
        ev.head.time = t;
        ev.head.seq = next_seq_++;
        ev.head.kind = kind_of(op);
        ev.op = op;
        ev.x = x;
        ev.y = y;
        heap_.push(ev);
    }

    // -- station state ---------------------------------------------------
    bool station_up(StationId id) const { return sc_.topology.station(id).up; }
    bool station_degraded(StationId id) const { return degraded_[id].has_value(); }

    Station view_for(StationId id, std::uint32_t stream) const {
        Station v = sc_.topology.station(id);
        std::uint64_t deliverable = degraded_[id] ? *degraded_[id] : v.capacity_bps;
        std::uint64_t others = res_.reserved_at(id) - res_.reserved_at(id, stream);
        v.available_bps = deliverable > others ? deliverable - others : 0;
        v.capacity_bps = deliverable;
        return v;
    }

    std::set<StationId> down_stations() const {
        std::set<StationId> out;
        for (const Station& s : sc_.topology.stations)
            if (!s.up) out.insert(s.id);
        return out;
    }

    // -- tracing ---------------------------------------------------------
    void trace(trace::Kind kind, std::uint32_t a = 0, std::uint32_t b = 0, std::uint32_t c = 0,
               std::uint64_t v = 0, std::uint64_t w = 0, double d = 0.0,
               std::vector<std::uint32_t> path = {}) {
        trace::Record r;
        r.kind = kind;
        r.t = now_;
        r.a = a;
        r.b = b;
        r.c = c;
        r.v = v;
        r.w = w;
        r.d = d;
        r.path = std::move(path);
        tr_.push(std::move(r));
    }

    // -- event handlers --------------------------------------------------
    void on_flow_start(std::uint32_t fid);
    void on_flow_end(std::uint32_t fid);
    void on_launch(std::uint32_t fid);
    void on_link_done(std::uint32_t link_idx, std::uint32_t dir);
    void on_bucket_done(std::uint32_t pkt_id);
    void on_arrival(std::uint32_t pkt_id);
    void on_tick(std::uint32_t fid);
    void on_deliver_local(std::uint32_t msg_idx, std::uint32_t at);
    void on_flag_check(std::uint32_t fid, std::uint32_t serial);
    void on_rebuild(std::uint32_t fid, std::uint32_t station);
    void on_retry_res(std::uint32_t fid);
    void on_inject(std::uint32_t failure_idx);

    // -- mechanics -------------------------------------------------------
    bool reserve_flow(FlowRt& f, trace::AttemptKind kind);
    void init_components(FlowRt& f);
    void refresh_components_path(FlowRt& f);
    void drop_packet(Pkt& p, StationId at, trace::DropCause cause);
    void forward_from(std::uint32_t pkt_id);
    void enqueue_on_link(std::uint32_t pkt_id, std::size_t link_idx, int dir);
    void serve_next(std::uint32_t link_idx, int dir);
    void send_message(const wire::Message& msg, StationId from, StationId to,
                      std::uint32_t stream);
    void handle_message(std::uint32_t msg_idx, StationId at);
    void apply_connector_result(FlowRt& f, const connector::StepResult& result);
    void apply_sender_update(const wire::SenderUpdate& update);
    connector::ConnectorContext connector_ctx(FlowRt& f);
    FlowSpec reserved_spec_for(const FlowRt& f) const;
    void audit_ledger();

    Scenario sc_;
    reservation::ReservationEngine res_;
    std::vector<FlowRt> flows_;
    std::vector<LinkRt> links_;
    std::vector<std::optional<std::uint64_t>> degraded_;
    std::vector<double> bucket_busy_;
    std::vector<Pkt> pkts_;
    std::vector<wire::Message> msgs_;
    std::priority_queue<Ev, std::vector<Ev>, EvLater> heap_;
    std::uint64_t next_seq_ = 0;
    double now_ = 0.0;
    trace::Trace tr_;
    std::uint64_t audit_violations_ = 0;
};

void Sim::audit_ledger() {
    auto violations = res_.audit();
    for (const auto& bad : violations) {
        trace(trace::Kind::audit_violation, 0, bad.station);
        ++audit_violations_;
    }
}

FlowSpec Sim::reserved_spec_for(const FlowRt& f) const {
    const reservation::Reservation* r = res_.find(f.id);
    if (r && r->state == reservation::ReservationState::active) return r->spec;
    return f.def.spec;
}

connector::ConnectorContext Sim::connector_ctx(FlowRt& f) {
    connector::ConnectorContext ctx;
    ctx.topo = &sc_.topology;
    ctx.cursor = &f.det.cursor;
    std::uint32_t stream = f.id;
    ctx.view = [this, stream](StationId id) { return view_for(id, stream); };
    return ctx;
}

void Sim::init_components(FlowRt& f) {
    const auto& path = f.current_path;
    assert(!path.empty());
    f.seat = path.back();
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        if (sc_.topology.station(*it).kind == StationKind::router) {
            f.seat = *it;
            break;
        }
    }
    std::uint32_t id = f.id;
    f.det.state.detector_id = id;
    f.det.state.connector_id = id;
    f.det.state.connector_address = f.seat;
    f.det.state.path = Path{path};
    f.det.state.required_qos.assign(path.size(), f.def.spec);
    f.det.cursor = AgentCursor{0, 0, sc_.tr_s, 0.0};
    f.det.pending.clear();

    f.con.state.connector_id = id;
    f.con.state.station_addresses = path;
    f.con.state.visit_times.assign(path.size(), 0.0);
    f.con.state.analyzer_id = id;
    f.con.state.analyzer_address = f.def.receiver;
    f.con.state.stream_id = id;
    f.con.state.detector_flag = 0;
    f.con.state.rsvp_handle = id;

    f.ana.state.connector_id = id;
    f.ana.state.analyzer_id = id;
    f.ana.state.connector_address = f.seat;
    f.ana.state.rsvp_handle = id;
    f.ana.state.connector_flag = 0;
    f.ana.pending.reset();

    f.components_active = true;
    schedule(now_ + sc_.tr_s, Op::tick, f.id);
}

void Sim::refresh_components_path(FlowRt& f) {
    const auto& path = f.current_path;
    f.seat = path.back();
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        if (sc_.topology.station(*it).kind == StationKind::router) {
            f.seat = *it;
            break;
        }
    }
    f.det.state.path = Path{path};
    f.det.state.required_qos.assign(path.size(), f.def.spec);
    f.det.state.connector_address = f.seat;
    f.det.pending.clear();
    f.con.state.station_addresses = path;
    f.con.state.visit_times.assign(path.size(), 0.0);
    f.ana.state.connector_address = f.seat;
}

bool Sim::reserve_flow(FlowRt& f, trace::AttemptKind kind) {
    auto down = down_stations();
    std::vector<StationId> route = f.current_path;
    if (route.empty()) {
        try {
            route = routing::shortest_path_avoiding(sc_.topology, f.def.sender,
                                                    f.def.receiver, down)
                        .stations;
        } catch (const routing::Unreachable&) {
            trace(trace::Kind::reserve_attempt, f.id, static_cast<std::uint32_t>(kind), 0);
            return false;
        }
    }

    bool ok = false;
    if (f.def.compound_deps.empty()) {
        auto res = res_.reserve(f.id, Path{route}, f.def.spec);
        ok = res.state == reservation::ReservationState::active;
        trace(trace::Kind::reserve_attempt, f.id, static_cast<std::uint32_t>(kind), ok ? 1 : 0);
        if (ok) trace(trace::Kind::reservation_active, f.id);
    } else {
        reservation::CompoundService svc;
        svc.root = {f.id, Path{route}, f.def.spec};
        bool deps_routable = true;
        std::vector<std::uint32_t> fresh;  // members reserved by this attempt
        for (std::uint32_t dep : f.def.compound_deps) {
            FlowRt& df = flows_[dep];
            if (res_.has_active(df.id) || df.ended) continue;
            std::vector<StationId> dep_route = df.current_path;
            if (dep_route.empty()) {
                try {
                    dep_route = routing::shortest_path_avoiding(sc_.topology, df.def.sender,
                                                                df.def.receiver, down)
                                    .stations;
                } catch (const routing::Unreachable&) {
                    deps_routable = false;
                    break;
                }
            }
            svc.dependencies.push_back({df.id, Path{dep_route}, df.def.spec});
            fresh.push_back(dep);
        }
        if (deps_routable) {
            ok = !res_.reserve_compound(svc).has_value();
        }
        trace(trace::Kind::reserve_attempt, f.id, static_cast<std::uint32_t>(trace::AttemptKind::compound),
              ok ? 1 : 0);
        if (ok) {
            trace(trace::Kind::reservation_active, f.id);
            for (std::uint32_t dep : fresh) {
                FlowRt& df = flows_[dep];
                trace(trace::Kind::reservation_active, df.id);
                const reservation::Reservation* r = res_.find(df.id);
                if (df.current_path.empty() && r) {
                    df.current_path = r->path.stations;
                    trace(trace::Kind::path_changed, df.id, 0, 0, 0, 0, 0.0, df.current_path);
                }
            }
        }
    }

    if (f.current_path.empty()) {
        f.current_path = route;
        trace(trace::Kind::path_changed, f.id, 0, 0, 0, 0, 0.0, f.current_path);
        if (sc_.mode == Mode::proposed && !f.components_active && !f.ended) init_components(f);
    }
    return ok;
}

void Sim::on_flow_start(std::uint32_t fid) {
    FlowRt& f = flows_[fid];
    f.started = true;
    trace(trace::Kind::flow_start, f.id, f.def.sender, f.def.receiver, f.def.spec.rate_bps, 0,
          f.def.stop_s, f.def.compound_deps);
    bool reserved = reserve_flow(f, trace::AttemptKind::initial);
    if (!reserved && now_ + kReservationRetryPeriod < f.def.stop_s)
        schedule(now_ + kReservationRetryPeriod, Op::retry_res, fid);
    if (sc_.mode == Mode::proposed && !f.current_path.empty() && !f.components_active)
        init_components(f);
    schedule(f.def.start_s + f.phase, Op::launch, fid);
    schedule(std::min(f.def.stop_s, sc_.horizon_s), Op::flow_end, fid);
}

void Sim::on_flow_end(std::uint32_t fid) {
    FlowRt& f = flows_[fid];
    if (f.ended) return;
    f.ended = true;
    f.components_active = false;
    if (f.con.episode.open) {
        f.con.episode.open = false;
        f.con.state.detector_flag = 0;
        trace(trace::Kind::episode_closed, f.id, f.con.episode.failed,
              static_cast<std::uint32_t>(connector::CloseReason::window_expired));
    }
    f.det.pending.clear();
    f.det.state.qos_test_value = 0;
    if (res_.has_active(f.id)) {
        res_.release(f.id);
        trace(trace::Kind::reservation_released, f.id);
    }
    trace(trace::Kind::flow_end, f.id);
}

void Sim::on_launch(std::uint32_t fid) {
    FlowRt& f = flows_[fid];
    if (f.ended || now_ >= f.def.stop_s) return;
    double next = now_ + transmit_delay(f.def.pkt_bytes, f.def.spec.rate_bps);
    if (next < f.def.stop_s && next <= sc_.horizon_s) schedule(next, Op::launch, fid);
    if (f.current_path.empty()) return;  // no route; the source cannot emit

    Pkt p;
    p.stream_id = f.id;
    p.seq_no = f.next_seq++;
    p.size_bytes = f.def.pkt_bytes;
    p.created = now_;
    p.route = f.current_path;
    p.hop = 0;
    p.current_station = p.route.front();
    pkts_.push_back(std::move(p));
    std::uint32_t pkt_id = static_cast<std::uint32_t>(pkts_.size() - 1);
    f.count.generated += 1;
    trace(trace::Kind::packet_generated, f.id, 0, 0, pkts_[pkt_id].seq_no, f.def.pkt_bytes);

    StationId origin = pkts_[pkt_id].route.front();
    if (!station_up(origin)) {
        drop_packet(pkts_[pkt_id], origin, trace::DropCause::station_down);
        return;
    }
    forward_from(pkt_id);
}

void Sim::drop_packet(Pkt& p, StationId at, trace::DropCause cause) {
    if (p.control) return;  // lost control messages surface as expired episodes
    flows_[p.stream_id].count.dropped += 1;
    trace(trace::Kind::packet_dropped, p.stream_id, at, static_cast<std::uint32_t>(cause), p.seq_no,
          p.size_bytes);
}

void Sim::forward_from(std::uint32_t pkt_id) {
    Pkt& p = pkts_[pkt_id];
    StationId cur = p.route[p.hop];
    if (p.hop + 1 == p.route.size()) {
        if (p.control) {
            handle_message(static_cast<std::uint32_t>(p.msg), cur);
        } else {
            p.delivered = now_;
            flows_[p.stream_id].count.delivered += 1;
            trace(trace::Kind::packet_delivered, p.stream_id, cur, 0, p.seq_no, p.size_bytes,
                  p.created);
        }
        return;
    }
    StationId next = p.route[p.hop + 1];
    auto link_idx = sc_.topology.link_between(cur, next);
    assert(link_idx.has_value());
    const Link& l = sc_.topology.links[*link_idx];
    int dir = l.a == cur ? 0 : 1;
    enqueue_on_link(pkt_id, *link_idx, dir);
}

void Sim::enqueue_on_link(std::uint32_t pkt_id, std::size_t link_idx, int dir) {
    LinkDirRt& d = links_[link_idx].dir[dir];
    Pkt& p = pkts_[pkt_id];
    if (!d.busy) {
        d.busy = true;
        d.in_service = pkt_id;
        const Link& l = sc_.topology.links[link_idx];
        schedule(now_ + transmit_delay(p.size_bytes, l.bandwidth_bps), Op::link_done,
                 static_cast<std::uint32_t>(link_idx), static_cast<std::uint32_t>(dir));
        return;
    }
    if (p.control) {
        d.ctrl.push_back(pkt_id);
        return;
    }
    if (!d.data.enqueue(pkt_id)) {
        StationId at = dir == 0 ? sc_.topology.links[link_idx].a : sc_.topology.links[link_idx].b;
        drop_packet(p, at, trace::DropCause::queue_full);
    }
}

void Sim::serve_next(std::uint32_t link_idx, int dir) {
    LinkDirRt& d = links_[link_idx].dir[dir];
    std::uint32_t next_pkt = 0;
    bool have = false;
    if (!d.ctrl.empty()) {
        next_pkt = d.ctrl.front();
        d.ctrl.pop_front();
        have = true;
    } else if (auto id = d.data.dequeue()) {
        next_pkt = *id;
        have = true;
    }
    if (!have) {
        d.busy = false;
        return;
    }
    d.in_service = next_pkt;
    const Link& l = sc_.topology.links[link_idx];
    schedule(now_ + transmit_delay(pkts_[next_pkt].size_bytes, l.bandwidth_bps), Op::link_done, link_idx,
             static_cast<std::uint32_t>(dir));
}

void Sim::on_link_done(std::uint32_t link_idx, std::uint32_t dir) {
    LinkDirRt& d = links_[link_idx].dir[dir];
    std::uint32_t pkt_id = d.in_service;
    const Link& l = sc_.topology.links[link_idx];
    schedule(now_ + l.prop_delay_s, Op::arrival, pkt_id);
    serve_next(link_idx, static_cast<int>(dir));
}

void Sim::on_arrival(std::uint32_t pkt_id) {
    Pkt& p = pkts_[pkt_id];
    p.hop += 1;
    StationId cur = p.route[p.hop];
    p.current_station = cur;
    if (!station_up(cur)) {
        drop_packet(p, cur, trace::DropCause::station_down);
        return;
    }
    if (station_degraded(cur) && !p.control) {
        std::uint64_t rate = std::max<std::uint64_t>(*degraded_[cur], 1);
        double service = transmit_delay(p.size_bytes, rate);
        double backlog = bucket_busy_[cur] > now_ ? bucket_busy_[cur] - now_ : 0.0;
        if (backlog >= kStationBacklogLimit * service) {
            drop_packet(p, cur, trace::DropCause::station_degraded);
            return;
        }
        bucket_busy_[cur] = std::max(bucket_busy_[cur], now_) + service;
        schedule(bucket_busy_[cur], Op::bucket_done, pkt_id);
        return;
    }
    forward_from(pkt_id);
}

void Sim::on_bucket_done(std::uint32_t pkt_id) {
    Pkt& p = pkts_[pkt_id];
    StationId cur = p.route[p.hop];
    if (!station_up(cur)) {
        drop_packet(p, cur, trace::DropCause::station_down);
        return;
    }
    forward_from(pkt_id);
}

void Sim::on_tick(std::uint32_t fid) {
    FlowRt& f = flows_[fid];
    if (f.ended || !f.components_active || f.current_path.empty()) return;
    double next = now_ + sc_.tr_s;
    if (next <= std::min(f.def.stop_s, sc_.horizon_s)) schedule(next, Op::tick, fid);

    std::size_t idx = detector::next_probe_index(f.det);
    StationId sid = f.det.state.path.stations[idx];
    Station view = view_for(sid, f.id);
    detector::BatchConfig batch{sc_.batching, sc_.max_batch};
    auto messages = detector::detector_step(f.det, now_, view, batch);

    // Connector bookkeeping of its own trailing walk.
    if (!f.con.state.visit_times.empty()) {
        std::size_t ci = static_cast<std::size_t>(f.det.cursor.sc % f.con.state.visit_times.size());
        f.con.state.visit_times[ci] = now_;
    }

    for (const wire::Message& m : messages) {
        if (const auto* alarm = std::get_if<wire::DetectorAlarm>(&m)) {
            trace(trace::Kind::alarm_entry, f.id, alarm->failed_station);
        } else if (const auto* batch_msg = std::get_if<wire::CumulativeAlarm>(&m)) {
            for (const auto& [station, qos] : batch_msg->entries)
                trace(trace::Kind::alarm_entry, f.id, station);
        }
        send_message(m, f.seat, f.seat, f.id);
    }
}

void Sim::send_message(const wire::Message& msg, StationId from, StationId to,
                       std::uint32_t stream) {
    std::uint32_t size = static_cast<std::uint32_t>(wire::encode(msg).size());
    bool transit = from != to;
    trace(trace::Kind::message_sent, stream, wire::message_type(msg), transit ? 1 : 0, size);
    msgs_.push_back(msg);
    std::uint32_t msg_idx = static_cast<std::uint32_t>(msgs_.size() - 1);

    if (!transit) {
        schedule(now_, Op::deliver_local, msg_idx, to);
        return;
    }
    if (!station_up(from)) return;  // dead origin, message never enters
    std::vector<StationId> route;
    try {
        route = routing::shortest_path_avoiding(sc_.topology, from, to, down_stations()).stations;
    } catch (const routing::Unreachable&) {
        return;  // no control route; recovery window will expire
    }
    Pkt p;
    p.stream_id = stream;
    p.size_bytes = size;
    p.created = now_;
    p.route = std::move(route);
    p.hop = 0;
    p.control = true;
    p.msg = static_cast<std::int32_t>(msg_idx);
    pkts_.push_back(std::move(p));
    forward_from(static_cast<std::uint32_t>(pkts_.size() - 1));
}

void Sim::apply_connector_result(FlowRt& f, const connector::StepResult& result) {
    if (result.opened) {
        trace(trace::Kind::episode_opened, f.id, *result.opened);
        schedule(f.con.episode.deadline, Op::flag_check, f.id, f.con.episode.serial);
    }
    for (const connector::Outbound& out : result.out) send_message(out.msg, f.seat, out.dest, f.id);
    if (result.closed) {
        trace(trace::Kind::episode_closed, f.id, f.con.episode.failed,
              static_cast<std::uint32_t>(*result.closed));
    }
}

void Sim::apply_sender_update(const wire::SenderUpdate& update) {
    FlowRt& f = flows_[update.stream_id];
    if (f.ended || update.new_path.empty()) return;
    if (update.new_path.stations == f.current_path) return;

    DiffResult diff = analyzer::diff_paths(Path{f.current_path}, update.new_path);
    std::vector<std::pair<StationId, FlowSpec>> per_station;
    for (StationId id : diff.diff2) per_station.emplace_back(id, update.flowspec);

    bool ok = false;
    if (res_.has_active(f.id)) {
        auto moved = res_.repin(f.id, update.new_path, per_station);
        ok = moved.state == reservation::ReservationState::active &&
             moved.path == update.new_path;
    } else {
        auto fresh = res_.reserve(f.id, update.new_path, update.flowspec);
        ok = fresh.state == reservation::ReservationState::active;
        if (ok) trace(trace::Kind::reservation_active, f.id);
    }
    trace(trace::Kind::reserve_attempt, f.id, static_cast<std::uint32_t>(trace::AttemptKind::repin),
          ok ? 1 : 0);
    if (!ok) return;  // stay on the old path; the detector will raise again

    StationId failed = f.con.episode.failed;
    f.current_path = update.new_path.stations;
    trace(trace::Kind::path_changed, f.id, 0, 0, 0, 0, 0.0, f.current_path);
    refresh_components_path(f);
    trace(trace::Kind::recovery_completed, f.id, failed, 0);
}

void Sim::handle_message(std::uint32_t msg_idx, StationId at) {
    const wire::Message msg = msgs_[msg_idx];

    if (const auto* alarm = std::get_if<wire::DetectorAlarm>(&msg)) {
        FlowRt& f = flows_[alarm->connector_id];
        if (f.ended) return;
        if (!Path{f.current_path}.contains(alarm->failed_station)) return;  // stale
        auto result = connector::connector_step(
            f.con, connector::AlarmMessage{*alarm}, now_, connector_ctx(f));
        apply_connector_result(f, result);
        return;
    }
    if (const auto* batch = std::get_if<wire::CumulativeAlarm>(&msg)) {
        FlowRt& f = flows_[batch->connector_id];
        if (f.ended) return;
        if (!Path{f.current_path}.contains(batch->entries.front().first)) return;
        auto result = connector::connector_step(
            f.con, connector::AlarmMessage{*batch}, now_, connector_ctx(f));
        apply_connector_result(f, result);
        return;
    }
    if (const auto* req = std::get_if<wire::RouteRequest>(&msg)) {
        // Routing service answers with every path it can offer.
        FlowRt& f = flows_[req->connector_id];
        wire::RouteReply reply;
        reply.connector_id = req->connector_id;
        try {
            reply.alternatives = routing::alternative_paths(sc_.topology, req->old_path,
                                                            req->failed_station,
                                                            sc_.k_alternatives);
        } catch (const routing::NoAlternativePath&) {
        }
        send_message(reply, at, f.seat, f.id);
        return;
    }
    if (const auto* reply = std::get_if<wire::RouteReply>(&msg)) {
        FlowRt& f = flows_[reply->connector_id];
        if (f.ended) return;
        auto result =
            connector::connector_step(f.con, *reply, now_, connector_ctx(f));
        apply_connector_result(f, result);
        return;
    }
    if (const auto* req = std::get_if<wire::AnalyzeRequest>(&msg)) {
        FlowRt& f = flows_[req->connector_id];
        if (f.ended) return;
        auto out = analyzer::analyzer_step(f.ana, analyzer::AnalyzerEvent{*req},
                                           reserved_spec_for(f));
        for (const wire::Message& m : out) {
            StationId dest =
                std::holds_alternative<wire::QosExtractRequest>(m) ? f.def.receiver : f.seat;
            send_message(m, at, dest, f.id);
        }
        return;
    }
    if (const auto* req = std::get_if<wire::QosExtractRequest>(&msg)) {
        // Receiver-side reservation agent speaks for the active reservation.
        FlowRt& f = flows_[req->analyzer_id];
        wire::QosExtractReply reply;
        reply.analyzer_id = req->analyzer_id;
        reply.qos_request = reserved_spec_for(f);
        send_message(reply, at, f.def.receiver, f.id);
        return;
    }
    if (const auto* reply = std::get_if<wire::QosExtractReply>(&msg)) {
        FlowRt& f = flows_[reply->analyzer_id];
        if (f.ended) return;
        auto out = analyzer::analyzer_step(f.ana, analyzer::AnalyzerEvent{*reply},
                                           reserved_spec_for(f));
        for (const wire::Message& m : out) send_message(m, at, f.seat, f.id);
        return;
    }
    if (const auto* reply = std::get_if<wire::AnalyzeReply>(&msg)) {
        FlowRt& f = flows_[reply->connector_id];
        if (f.ended) return;
        auto result =
            connector::connector_step(f.con, *reply, now_, connector_ctx(f));
        apply_connector_result(f, result);
        return;
    }
    if (const auto* update = std::get_if<wire::SenderUpdate>(&msg)) {
        apply_sender_update(*update);
        return;
    }
}

void Sim::on_deliver_local(std::uint32_t msg_idx, std::uint32_t at) {
    handle_message(msg_idx, at);
}

void Sim::on_flag_check(std::uint32_t fid, std::uint32_t serial) {
    FlowRt& f = flows_[fid];
    if (f.ended) return;
    auto result = connector::connector_step(f.con, connector::FlagCheck{serial}, now_,
                                            connector_ctx(f));
    apply_connector_result(f, result);
}

void Sim::on_rebuild(std::uint32_t fid, std::uint32_t station) {
    FlowRt& f = flows_[fid];
    if (f.ended || !f.started || now_ >= f.def.stop_s) return;
    if (!Path{f.current_path}.contains(station)) return;  // already moved

    std::vector<StationId> fresh;
    try {
        fresh = routing::shortest_path_avoiding(sc_.topology, f.def.sender, f.def.receiver,
                                                down_stations())
                    .stations;
    } catch (const routing::Unreachable&) {
        trace(trace::Kind::reserve_attempt, f.id,
              static_cast<std::uint32_t>(trace::AttemptKind::rebuild), 0);
        return;
    }
    if (fresh == f.current_path) return;

    if (res_.has_active(f.id)) {
        res_.release(f.id);
        trace(trace::Kind::reservation_released, f.id);
    }
    auto res = res_.reserve(f.id, Path{fresh}, f.def.spec);
    bool ok = res.state == reservation::ReservationState::active;
    trace(trace::Kind::reserve_attempt, f.id,
          static_cast<std::uint32_t>(trace::AttemptKind::rebuild), ok ? 1 : 0);
    if (ok) trace(trace::Kind::reservation_active, f.id);

    // Routing has converged either way; data follows the new route.
    f.current_path = fresh;
    trace(trace::Kind::path_changed, f.id, 0, 0, 0, 0, 0.0, f.current_path);
    if (ok) trace(trace::Kind::recovery_completed, f.id, station, 1);
    if (!ok && now_ + kReservationRetryPeriod < f.def.stop_s)
        schedule(now_ + kReservationRetryPeriod, Op::retry_res, fid);
}

void Sim::on_retry_res(std::uint32_t fid) {
    FlowRt& f = flows_[fid];
    if (f.ended || !f.started || now_ >= f.def.stop_s) return;
    if (res_.has_active(f.id)) return;
    bool ok = reserve_flow(f, trace::AttemptKind::retry);
    if (!ok && now_ + kReservationRetryPeriod < f.def.stop_s)
        schedule(now_ + kReservationRetryPeriod, Op::retry_res, fid);
}

void Sim::on_inject(std::uint32_t failure_idx) {
    const FailureDef& fd = sc_.failures[failure_idx];
    Station& st = sc_.topology.station(fd.station);
    if (fd.down) {
        st.up = false;
        trace(trace::Kind::failure_injected, 0, fd.station, 1, 0);
    } else {
        st.up = true;
        degraded_[fd.station] = fd.new_available_bps;
        bucket_busy_[fd.station] = now_;
        trace(trace::Kind::failure_injected, 0, fd.station, 0, fd.new_available_bps);
    }

    // The old system notices hard failures once routing converges; a QoS
    // degradation leaves it blind.
    if (sc_.mode == Mode::baseline && fd.down) {
        for (FlowRt& f : flows_) {
            if (!f.started || f.ended || now_ >= f.def.stop_s) continue;
            if (!Path{f.current_path}.contains(fd.station)) continue;
            schedule(now_ + sc_.baseline_recovery_delay_s, Op::rebuild, f.id, fd.station);
        }
    }
}

RunResult Sim::run() {
    validate_scenario(sc_);
    for (Station& st : sc_.topology.stations) st.available_bps = st.capacity_bps;
    degraded_.assign(sc_.topology.stations.size(), std::nullopt);
    bucket_busy_.assign(sc_.topology.stations.size(), 0.0);

    links_.resize(sc_.topology.links.size());
    for (std::size_t i = 0; i < links_.size(); ++i) {
        links_[i].dir[0].data.capacity = sc_.topology.links[i].queue_capacity;
        links_[i].dir[1].data.capacity = sc_.topology.links[i].queue_capacity;
    }

    res_.set_observer([this](StationId station, std::uint64_t rate, bool debit,
                             std::uint32_t stream) {
        trace(trace::Kind::debit_delta, stream, station, debit ? 1 : 0, rate);
    });

    // The seed shifts each flow's packet phase only.
    std::mt19937_64 rng(sc_.seed);
    flows_.resize(sc_.flows.size());
    for (std::size_t i = 0; i < sc_.flows.size(); ++i) {
        FlowRt& f = flows_[i];
        f.id = static_cast<std::uint32_t>(i);
        f.def = sc_.flows[i];
        double interval = transmit_delay(f.def.pkt_bytes, f.def.spec.rate_bps);
        f.phase = std::uniform_real_distribution<double>(0.0, interval)(rng);
    }

    trace(trace::Kind::run_header, static_cast<std::uint32_t>(sc_.mode), sc_.batching ? 1 : 0, 0,
          sc_.seed, 0, sc_.horizon_s);

    for (std::size_t i = 0; i < flows_.size(); ++i)
        schedule(flows_[i].def.start_s, Op::flow_start, static_cast<std::uint32_t>(i));
    for (std::size_t i = 0; i < sc_.failures.size(); ++i)
        schedule(sc_.failures[i].time_s, Op::inject, static_cast<std::uint32_t>(i));

    while (!heap_.empty() && heap_.top().head.time <= sc_.horizon_s) {
        Ev ev = heap_.top();
        heap_.pop();
        now_ = ev.head.time;
        switch (ev.op) {
            case Op::flow_start: on_flow_start(ev.x); break;
            case Op::flow_end: on_flow_end(ev.x); break;
            case Op::launch: on_launch(ev.x); break;
            case Op::link_done: on_link_done(ev.x, ev.y); break;
            case Op::bucket_done: on_bucket_done(ev.x); break;
            case Op::arrival: on_arrival(ev.x); break;
            case Op::tick: on_tick(ev.x); break;
            case Op::deliver_local: on_deliver_local(ev.x, ev.y); break;
            case Op::flag_check: on_flag_check(ev.x, ev.y); break;
            case Op::rebuild: on_rebuild(ev.x, ev.y); break;
            case Op::retry_res: on_retry_res(ev.x); break;
            case Op::inject: on_inject(ev.x); break;
        }
        audit_ledger();
    }

    RunResult out;
    out.trace = std::move(tr_);
    out.audit_violations = audit_violations_;
    for (const FlowRt& f : flows_) {
        StreamCount c = f.count;
        c.in_flight = c.generated - c.delivered - c.dropped;
        out.counts[f.id] = c;
    }
    out.report = metrics::finalize(out.trace);
    return out;
}

}  // namespace

void validate_scenario(const Scenario& sc) {
    const Topology& t = sc.topology;
    if (t.stations.empty()) throw ScenarioInvalid("topology: no stations");
    for (std::size_t i = 0; i < t.stations.size(); ++i) {
        if (t.stations[i].id != i)
            throw ScenarioInvalid("topology: station ids must be dense 0..S-1, found id " +
                                  std::to_string(t.stations[i].id) + " at position " +
                                  std::to_string(i));
        if (t.stations[i].capacity_bps == 0)
            throw ScenarioInvalid("topology: station " + std::to_string(i) + " has zero capacity");
    }
    std::set<std::pair<StationId, StationId>> seen;
    for (const Link& l : t.links) {
        if (l.a == l.b)
            throw ScenarioInvalid("topology: link joins station " + std::to_string(l.a) +
                                  " to itself");
        if (!t.has_station(l.a) || !t.has_station(l.b))
            throw ScenarioInvalid("topology: link endpoint does not exist");
        if (l.bandwidth_bps == 0) throw ScenarioInvalid("topology: link bandwidth must be > 0");
        if (l.queue_capacity < 1) throw ScenarioInvalid("topology: link queue must hold >= 1");
        auto key = std::minmax(l.a, l.b);
        if (!seen.insert({key.first, key.second}).second)
            throw ScenarioInvalid("topology: duplicate link " + std::to_string(l.a) + "-" +
                                  std::to_string(l.b));
    }
    // Connectivity.
    std::vector<bool> reach(t.stations.size(), false);
    std::vector<StationId> stack{0};
    reach[0] = true;
    while (!stack.empty()) {
        StationId cur = stack.back();
        stack.pop_back();
        for (StationId n : t.neighbors(cur)) {
            if (!reach[n]) {
                reach[n] = true;
                stack.push_back(n);
            }
        }
    }
    for (std::size_t i = 0; i < reach.size(); ++i)
        if (!reach[i])
            throw ScenarioInvalid("topology: graph is not connected (station " +
                                  std::to_string(i) + " unreachable)");

    if (sc.horizon_s <= 0) throw ScenarioInvalid("sim: horizon_s must be > 0");
    if (sc.tr_s <= 0) throw ScenarioInvalid("sim: tr_s must be > 0");
    if (sc.k_alternatives < 1) throw ScenarioInvalid("sim: k_alternatives must be >= 1");

    for (std::size_t i = 0; i < sc.flows.size(); ++i) {
        const FlowDef& f = sc.flows[i];
        if (!t.has_station(f.sender) || !t.has_station(f.receiver))
            throw ScenarioInvalid("flows: flow " + std::to_string(i) +
                                  " references a missing station");
        if (f.sender == f.receiver)
            throw ScenarioInvalid("flows: flow " + std::to_string(i) +
                                  " sender equals receiver");
        if (f.spec.rate_bps == 0)
            throw ScenarioInvalid("flows: flow " + std::to_string(i) + " rate must be > 0");
        if (f.pkt_bytes == 0)
            throw ScenarioInvalid("flows: flow " + std::to_string(i) + " pkt_bytes must be > 0");
        if (f.start_s < 0 || f.stop_s <= f.start_s || f.stop_s > sc.horizon_s)
            throw ScenarioInvalid("flows: flow " + std::to_string(i) +
                                  " needs 0 <= start < stop <= horizon");
        for (std::uint32_t dep : f.compound_deps)
            if (dep >= sc.flows.size() || dep == i)
                throw ScenarioInvalid("flows: flow " + std::to_string(i) +
                                      " has an invalid compound dependency");
    }
    // Dependency cycles.
    std::vector<int> mark(sc.flows.size(), 0);
    std::function<void(std::size_t)> visit = [&](std::size_t i) {
        if (mark[i] == 1)
            throw ScenarioInvalid("flows: compound dependencies form a cycle at flow " +
                                  std::to_string(i));
        if (mark[i] == 2) return;
        mark[i] = 1;
        for (std::uint32_t dep : sc.flows[i].compound_deps) visit(dep);
        mark[i] = 2;
    };
    for (std::size_t i = 0; i < sc.flows.size(); ++i) visit(i);

    for (std::size_t i = 0; i < sc.failures.size(); ++i) {
        const FailureDef& fd = sc.failures[i];
        if (!t.has_station(fd.station))
            throw ScenarioInvalid("failures: failure " + std::to_string(i) +
                                  " references a missing station");
        if (fd.time_s < 0 || fd.time_s > sc.horizon_s)
            throw ScenarioInvalid("failures: failure " + std::to_string(i) +
                                  " time must lie within the horizon");
    }
}

RunResult run(const Scenario& sc) {
    Sim sim(sc);
    return sim.run();
}

metrics::MetricsReport run_report(const Scenario& sc) {
    return run(sc).report;
}

}  // namespace qrs::netsim
