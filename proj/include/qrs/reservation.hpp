#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "qrs/core.hpp"

namespace qrs::reservation {

enum class Admission : std::uint8_t { accept, reject };

/// Hop-local admission decision. Accepting deducts spec.rate_bps from the
/// station's available bandwidth; rejecting leaves it untouched. A station
/// that is down rejects regardless of rate.
Admission admission_control(Station& station, const FlowSpec& spec);

enum class ReservationState : std::uint8_t { pending, active, released, failed };

struct Reservation {
    std::uint32_t stream_id = 0;
    Path path;
    FlowSpec spec;
    bool pinned = false;
    ReservationState state = ReservationState::pending;
    std::optional<StationId> failed_at;  // set when state == failed
};

struct ReservationRequest {
    std::uint32_t stream_id = 0;
    Path path;
    FlowSpec spec;
};

/// A service whose reservation requires its dependencies first; the whole
/// set is admitted atomically or not at all.
struct CompoundService {
    ReservationRequest root;
    std::vector<ReservationRequest> dependencies;
};

struct AuditViolation {
    StationId station = 0;
    std::uint64_t expected_reserved_bps = 0;
    std::uint64_t ledger_reserved_bps = 0;
};

/// Observes every ledger mutation, including rollback credits.
using LedgerObserver =
    std::function<void(StationId station, std::uint64_t rate_bps, bool debit, std::uint32_t stream_id)>;

/// Owns the per-station debit ledger. All mutations of Station::available_bps
/// in a topology go through one engine instance.
class ReservationEngine {
public:
    explicit ReservationEngine(Topology& topo) : topo_(&topo) {}

    void set_observer(LedgerObserver obs) { observer_ = std::move(obs); }

    /// Admits spec.rate_bps at every route station, receiver first. Any
    /// rejection rolls back the attempt and yields state == failed with the
    /// rejecting station in failed_at. A live reservation with the same
    /// stream id is released before re-admission.
    Reservation reserve(std::uint32_t stream_id, const Path& route, const FlowSpec& spec);

    /// Atomic all-or-nothing admission of dependencies then root. Returns
    /// the failing member's (stream_id, station) on failure.
    std::optional<std::pair<std::uint32_t, StationId>> reserve_compound(const CompoundService& svc);

    /// Moves an active reservation to new_path: stations only on the new
    /// path are admitted with their per-station specs, stations only on the
    /// old path are credited back, shared stations stay untouched. On
    /// admission failure the old reservation is left exactly as it was.
    Reservation repin(std::uint32_t stream_id, const Path& new_path,
                      const std::vector<std::pair<StationId, FlowSpec>>& per_station);

    void release(std::uint32_t stream_id);

    bool has_active(std::uint32_t stream_id) const;
    const Reservation* find(std::uint32_t stream_id) const;

    /// Sum of active reservation rates crossing `station`.
    std::uint64_t reserved_at(StationId station) const;
    /// Rate this stream holds at `station` (0 when none).
    std::uint64_t reserved_at(StationId station, std::uint32_t stream_id) const;

    /// Conservation check: capacity - available == sum of active rates at
    /// every station. Empty result means the ledger balances.
    std::vector<AuditViolation> audit() const;

private:
    bool admit_on(StationId id, const FlowSpec& spec, std::uint32_t stream_id);
    void credit_on(StationId id, std::uint64_t rate_bps, std::uint32_t stream_id);
    void rollback(const std::vector<std::pair<StationId, std::uint64_t>>& debits,
                  std::uint32_t stream_id);

    Topology* topo_;
    LedgerObserver observer_;
    std::map<std::uint32_t, Reservation> table_;
    // station -> stream -> reserved rate
    std::map<StationId, std::map<std::uint32_t, std::uint64_t>> ledger_;
};

}  // namespace qrs::reservation
