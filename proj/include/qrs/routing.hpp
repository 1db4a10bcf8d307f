#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>

#include "qrs/core.hpp"

namespace qrs::routing {

class Unreachable : public std::runtime_error {
public:
    Unreachable(StationId src, StationId dst);
};

class NoAlternativePath : public std::runtime_error {
public:
    NoAlternativePath();
};

/// Minimum-hop path from src to dst; ties broken by the lexicographically
/// smallest station-id sequence. Throws Unreachable.
Path shortest_path(const Topology& topo, StationId src, StationId dst);

/// Same, skipping every station in `banned` (converged-routing view).
Path shortest_path_avoiding(const Topology& topo, StationId src, StationId dst,
                            const std::set<StationId>& banned);

/// Up to k loop-free paths between old_path's endpoints that avoid the
/// failed station and every station in `exclude`, ordered by hop count then
/// station sequence. Throws NoAlternativePath when none exists.
std::vector<Path> alternative_paths(const Topology& topo, const Path& old_path,
                                    StationId failed, std::size_t k,
                                    const std::set<StationId>& exclude = {});

}  // namespace qrs::routing
