#include "qrs/routing.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>

namespace qrs::routing {

namespace {

constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();

// Hop distance from every allowed station to dst.
std::vector<std::size_t> hops_to(const Topology& topo, StationId dst,
                                 const std::set<StationId>& banned) {
    std::vector<std::size_t> dist(topo.stations.size(), kUnreached);
    if (banned.count(dst)) return dist;
    dist[dst] = 0;
    std::deque<StationId> frontier{dst};
    while (!frontier.empty()) {
        StationId cur = frontier.front();
        frontier.pop_front();
        for (StationId next : topo.neighbors(cur)) {
            if (banned.count(next) || dist[next] != kUnreached) continue;
            dist[next] = dist[cur] + 1;
            frontier.push_back(next);
        }
    }
    return dist;
}

Path lex_shortest(const Topology& topo, StationId src, StationId dst,
                  const std::set<StationId>& banned) {
    if (!topo.has_station(src) || !topo.has_station(dst) || src == dst)
        throw Unreachable(src, dst);
    auto dist = hops_to(topo, dst, banned);
    if (banned.count(src) || dist[src] == kUnreached) throw Unreachable(src, dst);

    // Greedy extension is lex-optimal: the smallest feasible next station
    // dominates any later positions.
    Path path;
    path.stations.push_back(src);
    StationId cur = src;
    while (cur != dst) {
        for (StationId next : topo.neighbors(cur)) {  // ascending ids
            if (banned.count(next)) continue;
            if (dist[next] != kUnreached && dist[next] + 1 == dist[cur]) {
                path.stations.push_back(next);
                cur = next;
                break;
            }
        }
    }
    return path;
}

}  // namespace

Unreachable::Unreachable(StationId src, StationId dst)
    : std::runtime_error("Unreachable: no path from station " + std::to_string(src) +
                         " to station " + std::to_string(dst)) {}

NoAlternativePath::NoAlternativePath()
    : std::runtime_error("NoAlternativePath: no loop-free path avoids the excluded stations") {}

Path shortest_path(const Topology& topo, StationId src, StationId dst) {
    return lex_shortest(topo, src, dst, {});
}

Path shortest_path_avoiding(const Topology& topo, StationId src, StationId dst,
                            const std::set<StationId>& banned) {
    return lex_shortest(topo, src, dst, banned);
}

std::vector<Path> alternative_paths(const Topology& topo, const Path& old_path,
                                    StationId failed, std::size_t k,
                                    const std::set<StationId>& exclude) {
    std::vector<Path> found;
    if (old_path.size() < 2 || k == 0) throw NoAlternativePath();
    StationId src = old_path.sender();
    StationId dst = old_path.receiver();

    std::set<StationId> banned = exclude;
    banned.insert(failed);
    if (banned.count(src) || banned.count(dst)) throw NoAlternativePath();

    auto dist = hops_to(topo, dst, banned);
    if (dist[src] == kUnreached) throw NoAlternativePath();

    std::size_t allowed = 0;
    for (const Station& s : topo.stations)
        if (!banned.count(s.id)) ++allowed;

    // Enumerate by hop-count layers; within a layer, DFS over ascending
    // neighbor ids yields paths in lexicographic order already.
    std::vector<bool> visited(topo.stations.size(), false);
    std::vector<StationId> stack;
    std::function<void(StationId, std::size_t, std::size_t)> dfs =
        [&](StationId cur, std::size_t used, std::size_t target_hops) {
            if (found.size() >= k) return;
            if (cur == dst) {
                if (used == target_hops) found.push_back(Path{stack});
                return;
            }
            if (used + dist[cur] > target_hops) return;  // cannot finish in time
            for (StationId next : topo.neighbors(cur)) {
                if (found.size() >= k) return;
                if (banned.count(next) || visited[next]) continue;
                if (dist[next] == kUnreached) continue;
                visited[next] = true;
                stack.push_back(next);
                dfs(next, used + 1, target_hops);
                stack.pop_back();
                visited[next] = false;
            }
        };

    for (std::size_t hops = dist[src]; hops + 1 <= allowed && found.size() < k; ++hops) {
        visited.assign(topo.stations.size(), false);
        visited[src] = true;
        stack.assign(1, src);
        dfs(src, 0, hops);
    }

    if (found.empty()) throw NoAlternativePath();
    return found;
}

}  // namespace qrs::routing
