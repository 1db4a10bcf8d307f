#include <doctest.h>

#include <map>

#include "oracles.hpp"
#include "qrs/connector.hpp"
#include "qrs/routing.hpp"

using namespace qrs;
using namespace qrs::connector;

namespace {

FlowSpec spec(std::uint64_t rate) { return {rate, 1000, 5000, Priority::streaming}; }

struct Fixture {
    Topology topo;
    Connector con;
    std::map<StationId, Station> views;
    AgentCursor cursor{10, 5, 0.010, 0.0};  // 50 ms window

    Fixture() {
        // hosts 0 and 5; routers 1..4 in a diamond: 1-2-4 and 1-3-4
        for (StationId i = 0; i < 6; ++i) {
            Station st;
            st.id = i;
            st.kind = (i == 0 || i == 5) ? StationKind::host : StationKind::router;
            st.capacity_bps = 10'000'000;
            st.available_bps = st.capacity_bps;
            topo.stations.push_back(st);
        }
        topo.links.push_back({0, 1, 1'000'000, 0.001, 400});
        topo.links.push_back({1, 2, 2'000'000, 0.001, 400});
        topo.links.push_back({2, 4, 2'000'000, 0.001, 400});
        topo.links.push_back({1, 3, 2'000'000, 0.001, 400});
        topo.links.push_back({3, 4, 2'000'000, 0.001, 400});
        topo.links.push_back({4, 5, 1'000'000, 0.001, 400});

        con.state.connector_id = 7;
        con.state.station_addresses = {0, 1, 2, 4, 5};
        con.state.visit_times.assign(5, 0.0);
        con.state.analyzer_id = 7;
        con.state.analyzer_address = 5;
        con.state.stream_id = 7;

        for (const Station& st : topo.stations) views[st.id] = st;
    }

    ConnectorContext ctx() {
        ConnectorContext c;
        c.topo = &topo;
        c.cursor = &cursor;
        c.view = [this](StationId id) { return views.at(id); };
        return c;
    }

    wire::DetectorAlarm alarm(StationId failed) {
        wire::DetectorAlarm a;
        a.connector_id = 7;
        a.failed_station = failed;
        a.failed_qos = spec(200'000);
        return a;
    }
};

}  // namespace

TEST_CASE("nearest_router walks upstream first") {
    Fixture f;
    CHECK(nearest_router(2, Path{{0, 1, 2, 4, 5}}, f.topo) == StationId{1});
    CHECK(nearest_router(4, Path{{0, 1, 2, 4, 5}}, f.topo) == StationId{2});
}

TEST_CASE("nearest_router falls back to a neighbor router") {
    Fixture f;
    // failed station first on path: no upstream, neighbors include router 1
    CHECK(nearest_router(0, Path{{0, 1, 2, 4, 5}}, f.topo) == StationId{1});
}

TEST_CASE("nearest_router fails on a pure-host topology") {
    Topology t;
    for (StationId i = 0; i < 2; ++i) {
        Station st;
        st.id = i;
        st.kind = StationKind::host;
        st.capacity_bps = 1'000'000;
        st.available_bps = st.capacity_bps;
        t.stations.push_back(st);
    }
    t.links.push_back({0, 1, 1'000'000, 0.001, 400});
    CHECK_THROWS_AS(nearest_router(0, Path{{0, 1}}, t), NoRouterAvailable);
}

TEST_CASE("happy path: alarm, route, analysis, sender update") {
    Fixture f;
    auto ctx = f.ctx();

    // Alarm opens the episode and asks the nearest router.
    auto r1 = connector_step(f.con, AlarmMessage{f.alarm(2)}, 1.0, ctx);
    CHECK(r1.opened == StationId{2});
    CHECK(f.con.state.detector_flag == 1);
    CHECK(f.con.episode.deadline == doctest::Approx(1.0 + 5 * 0.010));
    REQUIRE(r1.out.size() == 1);
    CHECK(r1.out[0].dest == StationId{1});
    const auto& req = std::get<wire::RouteRequest>(r1.out[0].msg);
    CHECK(req.failed_station == 2);

    // Routing offers the other branch; connector asks the analyzer.
    wire::RouteReply reply;
    reply.connector_id = 7;
    reply.alternatives = routing::alternative_paths(f.topo, Path{{0, 1, 2, 4, 5}}, 2, 4);
    auto r2 = connector_step(f.con, reply, 1.005, ctx);
    REQUIRE(r2.out.size() == 1);
    CHECK(r2.out[0].dest == StationId{5});
    const auto& areq = std::get<wire::AnalyzeRequest>(r2.out[0].msg);
    CHECK(areq.new_path == Path{{0, 1, 3, 4, 5}});

    // Analysis passes validation; the sender gets the update and the flag drops.
    wire::AnalyzeReply analysis;
    analysis.connector_id = 7;
    analysis.qos_request = spec(200'000);
    analysis.per_station_qos = {{3, spec(200'000)}};
    auto r3 = connector_step(f.con, analysis, 1.010, ctx);
    REQUIRE(r3.out.size() == 1);
    CHECK(r3.out[0].dest == StationId{0});
    const auto& update = std::get<wire::SenderUpdate>(r3.out[0].msg);
    CHECK(update.new_path == Path{{0, 1, 3, 4, 5}});
    CHECK(r3.closed == CloseReason::recovered_sent);
    CHECK(f.con.state.detector_flag == 0);
    CHECK_FALSE(update.new_path.contains(2));
}

TEST_CASE("failed validation re-asks the router, then succeeds") {
    Fixture f;
    auto ctx = f.ctx();
    f.views[3].available_bps = 50'000;  // candidate branch is saturated at first

    connector_step(f.con, AlarmMessage{f.alarm(2)}, 1.0, ctx);
    CHECK(f.con.episode.route_requests == 1);

    wire::RouteReply reply;
    reply.connector_id = 7;
    reply.alternatives = routing::alternative_paths(f.topo, Path{{0, 1, 2, 4, 5}}, 2, 4);
    connector_step(f.con, reply, 1.005, ctx);

    wire::AnalyzeReply analysis;
    analysis.connector_id = 7;
    analysis.qos_request = spec(200'000);
    analysis.per_station_qos = {{3, spec(200'000)}};
    auto r = connector_step(f.con, analysis, 1.010, ctx);
    CHECK(r.rejected_at == StationId{3});
    CHECK(f.con.episode.route_requests == 2);  // a second RouteRequest went out
    REQUIRE(r.out.size() == 1);
    CHECK(std::holds_alternative<wire::RouteRequest>(r.out[0].msg));
    CHECK(f.con.state.detector_flag == 1);  // still recovering

    // With station 3 rejected, the same reply has nothing viable left.
    auto r2 = connector_step(f.con, reply, 1.015, ctx);
    CHECK(r2.closed == CloseReason::no_alternative);
    CHECK(f.con.state.detector_flag == 0);
}

TEST_CASE("no alternative in the topology ends the episode") {
    Fixture f;
    auto ctx = f.ctx();
    // Fail station 4: exhaustive enumeration confirms every 0->5 path uses it.
    auto every = oracle::enumerate_paths(f.topo, 0, 5, {4}, 16);
    CHECK(every.empty());

    connector_step(f.con, AlarmMessage{f.alarm(4)}, 2.0, ctx);
    wire::RouteReply reply;
    reply.connector_id = 7;  // router found nothing
    auto r = connector_step(f.con, reply, 2.004, ctx);
    CHECK(r.closed == CloseReason::no_alternative);
    CHECK(f.con.state.detector_flag == 0);
}

TEST_CASE("window expiry closes an unresolved episode") {
    Fixture f;
    auto ctx = f.ctx();
    connector_step(f.con, AlarmMessage{f.alarm(2)}, 1.0, ctx);
    std::uint32_t serial = f.con.episode.serial;

    auto early = connector_step(f.con, FlagCheck{serial}, 1.02, ctx);
    CHECK_FALSE(early.closed.has_value());

    auto late = connector_step(f.con, FlagCheck{serial}, 1.05, ctx);
    CHECK(late.closed == CloseReason::window_expired);
    CHECK(f.con.state.detector_flag == 0);

    // A stale serial from an older episode cannot close a newer one.
    connector_step(f.con, AlarmMessage{f.alarm(2)}, 2.0, ctx);
    auto stale = connector_step(f.con, FlagCheck{serial}, 9.0, ctx);
    CHECK_FALSE(stale.closed.has_value());
    CHECK(f.con.state.detector_flag == 1);
}

TEST_CASE("alarms during an open episode are ignored") {
    Fixture f;
    auto ctx = f.ctx();
    connector_step(f.con, AlarmMessage{f.alarm(2)}, 1.0, ctx);
    auto r = connector_step(f.con, AlarmMessage{f.alarm(4)}, 1.001, ctx);
    CHECK_FALSE(r.opened.has_value());
    CHECK(r.out.empty());
    CHECK(f.con.alarms_ignored == 1);
    CHECK(f.con.episode.failed == StationId{2});
}

TEST_CASE("cumulative alarm excludes its extra entries from candidates") {
    Fixture f;
    auto ctx = f.ctx();
    wire::CumulativeAlarm batch;
    batch.connector_id = 7;
    batch.entries = {{2, spec(200'000)}, {4, spec(200'000)}};
    auto r = connector_step(f.con, AlarmMessage{batch}, 1.0, ctx);
    CHECK(r.opened == StationId{2});
    CHECK(f.con.episode.rejected_stations.count(4) == 1);

    wire::RouteReply reply;
    reply.connector_id = 7;
    reply.alternatives = routing::alternative_paths(f.topo, Path{{0, 1, 2, 4, 5}}, 2, 4);
    auto r2 = connector_step(f.con, reply, 1.004, ctx);
    // Every remaining route crosses station 4, so nothing is viable.
    CHECK(r2.closed == CloseReason::no_alternative);
}
