#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qrs/core.hpp"

namespace qrs::trace {

/// One record per observable simulation event. Field use by kind:
///   run_header:        a=mode b=batching v=seed d=horizon_s
///   flow_start:        a=stream b=sender c=receiver v=rate_bps d=stop_s path=compound_deps
///   flow_end:          a=stream
///   packet_generated:  a=stream v=seq w=size_bytes
///   packet_delivered:  a=stream v=seq w=size_bytes d=created_s
///   packet_dropped:    a=stream b=station c=cause v=seq w=size_bytes
///   reserve_attempt:   a=stream b=attempt_kind c=ok
///   debit_delta:       a=stream b=station c=1 debit / 0 credit v=rate_bps
///   failure_injected:  b=station c=1 down / 0 degrade v=new_rate_bps
///   alarm_entry:       a=stream b=station
///   episode_opened:    a=stream b=failed_station
///   episode_closed:    a=stream b=failed_station c=reason
///   recovery_completed:a=stream b=failed_station c=0 repin / 1 rebuild
///   path_changed:      a=stream path=stations
///   message_sent:      a=stream b=wire_type c=1 transit / 0 local v=size_bytes
///   reservation_active:a=stream
///   reservation_released: a=stream
///   audit_violation:   b=station
enum class Kind : std::uint8_t {
    run_header = 0,
    flow_start,
    flow_end,
    packet_generated,
    packet_delivered,
    packet_dropped,
    reserve_attempt,
    debit_delta,
    failure_injected,
    alarm_entry,
    episode_opened,
    episode_closed,
    recovery_completed,
    path_changed,
    message_sent,
    reservation_active,
    reservation_released,
    audit_violation,
};

enum class DropCause : std::uint32_t {
    queue_full = 0,
    station_down = 1,
    station_degraded = 2,
    no_route = 3,
};

enum class AttemptKind : std::uint32_t {
    initial = 0,
    retry = 1,
    repin = 2,
    rebuild = 3,
    compound = 4,
};

struct Record {
    Kind kind = Kind::run_header;
    double t = 0.0;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    std::uint32_t c = 0;
    std::uint64_t v = 0;
    std::uint64_t w = 0;
    double d = 0.0;
    std::vector<std::uint32_t> path;

    bool operator==(const Record&) const = default;
};

struct Trace {
    std::vector<Record> records;

    void push(Record r) { records.push_back(std::move(r)); }
    bool operator==(const Trace&) const = default;
};

/// Versioned big-endian binary serialization.
void save(const Trace& tr, const std::string& file);
Trace load(const std::string& file);

std::vector<std::uint8_t> serialize(const Trace& tr);
Trace deserialize(const std::vector<std::uint8_t>& bytes);

}  // namespace qrs::trace
