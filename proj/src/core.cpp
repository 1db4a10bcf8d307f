#include "qrs/core.hpp"

#include <algorithm>
#include <unordered_set>

namespace qrs {

std::optional<std::size_t> Topology::link_between(StationId a, StationId b) const {
    for (std::size_t i = 0; i < links.size(); ++i) {
        const Link& l = links[i];
        if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) return i;
    }
    return std::nullopt;
}

std::vector<StationId> Topology::neighbors(StationId id) const {
    std::vector<StationId> out;
    for (const Link& l : links) {
        if (l.a == id) out.push_back(l.b);
        if (l.b == id) out.push_back(l.a);
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool Path::contains(StationId id) const {
    return std::find(stations.begin(), stations.end(), id) != stations.end();
}

std::optional<std::size_t> Path::position_of(StationId id) const {
    auto it = std::find(stations.begin(), stations.end(), id);
    if (it == stations.end()) return std::nullopt;
    return static_cast<std::size_t>(it - stations.begin());
}

bool path_less(const Path& lhs, const Path& rhs) {
    if (lhs.size() != rhs.size()) return lhs.size() < rhs.size();
    return lhs.stations < rhs.stations;
}

bool validate_path(const Path& path, const Topology& topo) {
    if (path.size() < 2) return false;
    std::unordered_set<StationId> seen;
    for (StationId id : path.stations) {
        if (!topo.has_station(id)) return false;
        if (!seen.insert(id).second) return false;  // repeated station
    }
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (!topo.link_between(path.stations[i], path.stations[i + 1])) return false;
    }
    return true;
}

}  // namespace qrs
