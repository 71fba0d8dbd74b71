#include "depwise/graph.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "depwise/errors.hpp"

namespace depwise {

int EntityGraph::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw IndexError("unknown entity: " + name);
    return it->second;
}

const std::string& EntityGraph::name_of(int node) const {
    if (node < 0 || node >= node_count()) throw IndexError("node index out of range");
    return names_[node];
}

const std::vector<EntityGraph::Arc>& EntityGraph::neighbors(int node) const {
    if (node < 0 || node >= node_count()) throw IndexError("node index out of range");
    return adjacency_[node];
}

const EntityGraph::Edge& EntityGraph::edge(int e) const {
    if (e < 0 || e >= edge_count()) throw IndexError("edge index out of range");
    return edges_[e];
}

RelationLabel EntityGraph::label_between(int from, int to) const {
    for (const Arc& arc : neighbors(from)) {
        if (arc.neighbor == to) {
            const Edge& e = edges_[arc.edge];
            return e.a == from ? e.label_ab : inverse_label(e.label_ab);
        }
    }
    throw IndexError("nodes are not adjacent");
}

int EntityGraph::add_node(const std::string& name) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    int id = node_count();
    index_.emplace(name, id);
    names_.push_back(name);
    adjacency_.emplace_back();
    return id;
}

void EntityGraph::add_edge(int src, RelationLabel label, int dst) {
    int e = edge_count();
    edges_.push_back({src, dst, label});
    adjacency_[src].push_back({dst, e});
    adjacency_[dst].push_back({src, e});
}

void EntityGraph::finalize() {
    for (auto& arcs : adjacency_) {
        std::sort(arcs.begin(), arcs.end(), [&](const Arc& x, const Arc& y) {
            return names_[x.neighbor] < names_[y.neighbor];
        });
    }
}

EntityGraph build_graph(const std::vector<Triple>& triples) {
    EntityGraph g;
    // Key is the name-ordered pair; value is the label oriented min -> max.
    std::map<std::pair<std::string, std::string>, RelationLabel> seen;
    for (const Triple& t : triples) {
        int s = g.add_node(t.src);
        int d = g.add_node(t.dst);
        if (s == d) continue;
        bool flipped = t.dst < t.src;
        std::pair<std::string, std::string> key =
            flipped ? std::make_pair(t.dst, t.src) : std::make_pair(t.src, t.dst);
        RelationLabel oriented = flipped ? inverse_label(t.label) : t.label;
        auto it = seen.find(key);
        if (it != seen.end()) {
            if (it->second != oriented) {
                throw ConflictError("contradicting relation between " + t.src + " and " + t.dst);
            }
            continue;
        }
        seen.emplace(key, oriented);
        g.add_edge(s, t.label, d);
    }
    g.finalize();
    return g;
}

std::vector<int> bfs_distances(const EntityGraph& g, int src) {
    std::vector<int> dist(g.node_count(), -1);
    if (src < 0 || src >= g.node_count()) throw IndexError("node index out of range");
    dist[src] = 0;
    std::deque<int> queue{src};
    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        for (const auto& arc : g.neighbors(cur)) {
            if (dist[arc.neighbor] < 0) {
                dist[arc.neighbor] = dist[cur] + 1;
                queue.push_back(arc.neighbor);
            }
        }
    }
    return dist;
}

std::optional<Path> bfs_shortest_path(const EntityGraph& g, int src, int dst) {
    if (src < 0 || src >= g.node_count() || dst < 0 || dst >= g.node_count()) {
        throw IndexError("node index out of range");
    }
    std::vector<int> to_dst = bfs_distances(g, dst);
    if (to_dst[src] < 0) return std::nullopt;
    // Greedy descent on distance-to-target; adjacency is name-sorted, so the
    // first admissible neighbour extends the lexicographically smallest
    // shortest path.
    Path path;
    path.nodes.push_back(src);
    int cur = src;
    while (cur != dst) {
        int next = -1;
        for (const auto& arc : g.neighbors(cur)) {
            if (to_dst[arc.neighbor] == to_dst[cur] - 1) {
                next = arc.neighbor;
                break;
            }
        }
        path.nodes.push_back(next);
        cur = next;
    }
    return path;
}

std::optional<Path> bfs_shortest_path(const EntityGraph& g, const std::string& src,
                                      const std::string& dst) {
    return bfs_shortest_path(g, g.index_of(src), g.index_of(dst));
}

std::vector<std::pair<int, int>> connected_pairs(const EntityGraph& g) {
    std::vector<int> by_name(g.node_count());
    for (int i = 0; i < g.node_count(); ++i) by_name[i] = i;
    std::sort(by_name.begin(), by_name.end(),
              [&](int a, int b) { return g.name_of(a) < g.name_of(b); });

    std::vector<std::pair<int, int>> pairs;
    for (int s : by_name) {
        std::vector<int> dist = bfs_distances(g, s);
        for (int t : by_name) {
            if (dist[t] >= 2) pairs.emplace_back(s, t);
        }
    }
    return pairs;
}

Offset path_offset(const EntityGraph& g, const Path& path) {
    Offset total;
    for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i) {
        total = total + offset_of(g.label_between(path.nodes[i], path.nodes[i + 1]));
    }
    return total;
}

}  // namespace depwise
