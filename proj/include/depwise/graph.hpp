#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "depwise/relation.hpp"

namespace depwise {

struct Triple {
    std::string src;
    RelationLabel label = RelationLabel::Overlap;
    std::string dst;

    friend bool operator==(const Triple& a, const Triple& b) {
        return a.src == b.src && a.label == b.label && a.dst == b.dst;
    }
};

// Undirected entity graph. Each stored edge keeps the label oriented from
// endpoint `a` to endpoint `b`; traversal in the other direction reads the
// inverse label. Adjacency lists are sorted by neighbour name so every walk
// over the graph is reproducible regardless of input order.
class EntityGraph {
public:
    struct Edge {
        int a = -1;
        int b = -1;
        RelationLabel label_ab = RelationLabel::Overlap;  // a is label_ab of b
    };

    struct Arc {
        int neighbor = -1;
        int edge = -1;
    };

    int node_count() const { return static_cast<int>(names_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    bool has_node(const std::string& name) const { return index_.count(name) > 0; }
    int index_of(const std::string& name) const;
    const std::string& name_of(int node) const;

    const std::vector<Arc>& neighbors(int node) const;
    int degree(int node) const { return static_cast<int>(neighbors(node).size()); }
    const Edge& edge(int e) const;

    // Label oriented from -> to; IndexError when the nodes are not adjacent.
    RelationLabel label_between(int from, int to) const;

    int add_node(const std::string& name);
    void add_edge(int src, RelationLabel label, int dst);
    void finalize();  // sorts adjacency; called by build_graph

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_;
    std::vector<Edge> edges_;
    std::vector<std::vector<Arc>> adjacency_;
};

// Nodes are created in first-mention order; duplicate triples are dropped,
// contradicting labels for the same pair raise ConflictError. A self-loop
// registers its entity but adds no edge.
EntityGraph build_graph(const std::vector<Triple>& triples);

struct Path {
    std::vector<int> nodes;

    int hops() const { return static_cast<int>(nodes.size()) - 1; }
};

// Hop counts from src to every node; -1 marks unreachable.
std::vector<int> bfs_distances(const EntityGraph& g, int src);

// Shortest path whose node-name sequence is lexicographically smallest among
// all shortest paths; nullopt when disconnected.
std::optional<Path> bfs_shortest_path(const EntityGraph& g, int src, int dst);
std::optional<Path> bfs_shortest_path(const EntityGraph& g, const std::string& src,
                                      const std::string& dst);

// All ordered pairs at hop distance >= 2, sorted by (source name, target name).
std::vector<std::pair<int, int>> connected_pairs(const EntityGraph& g);

// Sum of per-hop label offsets along a path, front to back.
Offset path_offset(const EntityGraph& g, const Path& path);

}  // namespace depwise
