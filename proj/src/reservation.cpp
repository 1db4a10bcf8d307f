#include "qrs/reservation.hpp"

#include <algorithm>
#include <cassert>
#include <set>

namespace qrs::reservation {

Admission admission_control(Station& station, const FlowSpec& spec) {
    if (!station.up) return Admission::reject;
    if (station.available_bps < spec.rate_bps) return Admission::reject;
    station.available_bps -= spec.rate_bps;
    return Admission::accept;
}

bool ReservationEngine::admit_on(StationId id, const FlowSpec& spec, std::uint32_t stream_id) {
    if (admission_control(topo_->station(id), spec) != Admission::accept) return false;
    if (observer_) observer_(id, spec.rate_bps, true, stream_id);
    return true;
}

void ReservationEngine::credit_on(StationId id, std::uint64_t rate_bps, std::uint32_t stream_id) {
    Station& st = topo_->station(id);
    st.available_bps += rate_bps;
    assert(st.available_bps <= st.capacity_bps);
    if (observer_) observer_(id, rate_bps, false, stream_id);
}

void ReservationEngine::rollback(const std::vector<std::pair<StationId, std::uint64_t>>& debits,
                                 std::uint32_t stream_id) {
    for (auto it = debits.rbegin(); it != debits.rend(); ++it)
        credit_on(it->first, it->second, stream_id);
}

Reservation ReservationEngine::reserve(std::uint32_t stream_id, const Path& route,
                                       const FlowSpec& spec) {
    if (has_active(stream_id)) release(stream_id);

    Reservation res;
    res.stream_id = stream_id;
    res.path = route;
    res.spec = spec;

    std::vector<std::pair<StationId, std::uint64_t>> debits;
    // Receiver-initiated: admission walks the reverse data path.
    for (auto it = route.stations.rbegin(); it != route.stations.rend(); ++it) {
        if (!admit_on(*it, spec, stream_id)) {
            rollback(debits, stream_id);
            res.state = ReservationState::failed;
            res.failed_at = *it;
            return res;
        }
        debits.emplace_back(*it, spec.rate_bps);
    }

    res.state = ReservationState::active;
    res.pinned = true;
    for (StationId id : route.stations) ledger_[id][stream_id] = spec.rate_bps;
    table_[stream_id] = res;
    return res;
}

std::optional<std::pair<std::uint32_t, StationId>> ReservationEngine::reserve_compound(
    const CompoundService& svc) {
    std::vector<std::uint32_t> done;
    auto attempt = [&](const ReservationRequest& req) -> std::optional<StationId> {
        Reservation r = reserve(req.stream_id, req.path, req.spec);
        if (r.state != ReservationState::active) return r.failed_at.value_or(req.path.sender());
        done.push_back(req.stream_id);
        return std::nullopt;
    };

    for (const ReservationRequest& dep : svc.dependencies) {
        if (has_active(dep.stream_id)) continue;  // already in place
        if (auto station = attempt(dep)) {
            for (std::uint32_t id : done) release(id);
            return std::make_pair(dep.stream_id, *station);
        }
    }
    if (auto station = attempt(svc.root)) {
        for (std::uint32_t id : done) release(id);
        return std::make_pair(svc.root.stream_id, *station);
    }
    return std::nullopt;
}

Reservation ReservationEngine::repin(std::uint32_t stream_id, const Path& new_path,
                                     const std::vector<std::pair<StationId, FlowSpec>>& per_station) {
    auto it = table_.find(stream_id);
    assert(it != table_.end() && it->second.state == ReservationState::active);
    Reservation& res = it->second;

    std::set<StationId> old_set(res.path.stations.begin(), res.path.stations.end());
    std::set<StationId> new_set(new_path.stations.begin(), new_path.stations.end());

    auto spec_for = [&](StationId id) {
        for (const auto& [sid, fs] : per_station)
            if (sid == id) return fs;
        return res.spec;
    };

    // Admit the delta first, receiver towards sender; the old reservation
    // must survive untouched if any admission rejects.
    std::vector<std::pair<StationId, std::uint64_t>> debits;
    for (auto rit = new_path.stations.rbegin(); rit != new_path.stations.rend(); ++rit) {
        if (old_set.count(*rit)) continue;
        FlowSpec fs = spec_for(*rit);
        if (!admit_on(*rit, fs, stream_id)) {
            rollback(debits, stream_id);
            Reservation failed = res;
            failed.state = ReservationState::failed;
            failed.failed_at = *rit;
            return failed;  // table entry keeps the old active reservation
        }
        debits.emplace_back(*rit, fs.rate_bps);
    }

    // Release stations the flow no longer crosses.
    for (StationId id : res.path.stations) {
        if (new_set.count(id)) continue;
        auto& per_stream = ledger_[id];
        auto held = per_stream.find(stream_id);
        if (held != per_stream.end()) {
            credit_on(id, held->second, stream_id);
            per_stream.erase(held);
        }
    }
    for (const auto& [id, rate] : debits) ledger_[id][stream_id] = rate;

    res.path = new_path;
    res.pinned = true;
    return res;
}

void ReservationEngine::release(std::uint32_t stream_id) {
    auto it = table_.find(stream_id);
    if (it == table_.end() || it->second.state != ReservationState::active) return;
    for (StationId id : it->second.path.stations) {
        auto& per_stream = ledger_[id];
        auto held = per_stream.find(stream_id);
        if (held != per_stream.end()) {
            credit_on(id, held->second, stream_id);
            per_stream.erase(held);
        }
    }
    it->second.state = ReservationState::released;
    it->second.pinned = false;
}

bool ReservationEngine::has_active(std::uint32_t stream_id) const {
    auto it = table_.find(stream_id);
    return it != table_.end() && it->second.state == ReservationState::active;
}

const Reservation* ReservationEngine::find(std::uint32_t stream_id) const {
    auto it = table_.find(stream_id);
    return it == table_.end() ? nullptr : &it->second;
}

std::uint64_t ReservationEngine::reserved_at(StationId station) const {
    auto it = ledger_.find(station);
    if (it == ledger_.end()) return 0;
    std::uint64_t sum = 0;
    for (const auto& [stream, rate] : it->second) sum += rate;
    return sum;
}

std::uint64_t ReservationEngine::reserved_at(StationId station, std::uint32_t stream_id) const {
    auto it = ledger_.find(station);
    if (it == ledger_.end()) return 0;
    auto held = it->second.find(stream_id);
    return held == it->second.end() ? 0 : held->second;
}

std::vector<AuditViolation> ReservationEngine::audit() const {
    std::vector<AuditViolation> bad;
    for (const Station& st : topo_->stations) {
        std::uint64_t expected = reserved_at(st.id);
        std::uint64_t ledger = st.capacity_bps - st.available_bps;
        if (expected != ledger) bad.push_back({st.id, expected, ledger});
    }
    return bad;
}

}  // namespace qrs::reservation
