#include "depwise/engine.hpp"

#include <algorithm>
#include <unordered_map>

#include "depwise/errors.hpp"

namespace depwise {

std::vector<Tensor> EngineWeights::parameters() const {
    std::vector<Tensor> out;
    auto push = [&](const std::vector<Tensor>& ps) { out.insert(out.end(), ps.begin(), ps.end()); };
    push(ffn_init.parameters());
    push(lstm.parameters());
    push(ffn_compose.parameters());
    push(ln_compose.parameters());
    push(ffn_readout.parameters());
    push(ln_readout.parameters());
    return out;
}

EngineWeights make_engine_weights(int d, std::mt19937_64& rng, bool requires_grad) {
    EngineWeights w;
    w.ffn_init = make_ffn({3 * d, d, d}, Nonlinearity::Tanh, rng, requires_grad);
    w.lstm = make_lstm(d, d, rng, requires_grad);
    w.ffn_compose = make_ffn({d, d, d}, Nonlinearity::Tanh, rng, requires_grad);
    w.ln_compose = make_layernorm(d, requires_grad);
    w.ffn_readout = make_ffn({3 * d, d, d}, Nonlinearity::Tanh, rng, requires_grad);
    w.ln_readout = make_layernorm(d, requires_grad);
    return w;
}

const Tensor& EngineInputs::feature(int edge, int from) const {
    const auto& e = graph->edge(edge);
    if (e.a == from) return edge_feature[edge][0];
    if (e.b == from) return edge_feature[edge][1];
    throw IndexError("node is not an endpoint of the edge");
}

void validate_engine_inputs(const EngineInputs& in, const EngineConfig& cfg) {
    if (cfg.dim <= 0) throw ConfigError("engine dimension must be positive");
    if (!cfg.exact && cfg.weights == nullptr) {
        throw ConfigError("non-exact engine needs weights");
    }
    if (in.graph == nullptr) throw ConfigError("engine inputs missing graph");
    const int n = in.graph->node_count();
    if (static_cast<int>(in.node_embed.size()) != n) {
        throw ConfigError("node embedding count does not match graph");
    }
    for (const auto& v : in.node_embed) {
        if (!v || v->shape.size() != 1 || v->shape[0] != cfg.dim) {
            throw ConfigError("node embedding width does not match engine dimension");
        }
    }
    if (static_cast<int>(in.edge_feature.size()) != in.graph->edge_count()) {
        throw ConfigError("edge feature count does not match graph");
    }
    for (const auto& pair : in.edge_feature) {
        for (const auto& f : pair) {
            if (!f || f->shape.size() != 1 || f->shape[0] != cfg.dim) {
                throw ConfigError("edge feature width does not match engine dimension");
            }
        }
    }
}

std::vector<NodeMemory> init_memories(const EngineInputs& in, const EngineConfig& cfg) {
    validate_engine_inputs(in, cfg);
    const EntityGraph& g = *in.graph;
    std::vector<NodeMemory> mems;
    mems.reserve(g.node_count());
    for (int i = 0; i < g.node_count(); ++i) {
        NodeMemory m = zero_memory(cfg.dim);
        for (const auto& arc : g.neighbors(i)) {
            Tensor filler;
            if (cfg.exact) {
                filler = in.feature(arc.edge, i);
            } else {
                Tensor x = concat({in.node_embed[i], in.feature(arc.edge, i),
                                   in.node_embed[arc.neighbor]});
                filler = ffn_forward(cfg.weights->ffn_init, x);
            }
            m = store(m, filler, in.node_embed[arc.neighbor]);
        }
        mems.push_back(std::move(m));
    }
    return mems;
}

Tensor aggregate(const EngineConfig& cfg, const std::vector<Tensor>& hop_fillers) {
    if (hop_fillers.empty()) throw ArgumentError("aggregate needs at least one hop filler");
    switch (cfg.aggregator) {
        case AggregatorKind::RecurrentGated:
            if (cfg.weights == nullptr) throw ConfigError("recurrent aggregator needs weights");
            return lstm_last_hidden(cfg.weights->lstm, hop_fillers);
        case AggregatorKind::Mean: {
            Tensor s = hop_fillers[0];
            for (std::size_t i = 1; i < hop_fillers.size(); ++i) s = add(s, hop_fillers[i]);
            return scale(s, 1.0 / static_cast<double>(hop_fillers.size()));
        }
        case AggregatorKind::Max: {
            Tensor m = hop_fillers[0];
            for (std::size_t i = 1; i < hop_fillers.size(); ++i) m = vmax(m, hop_fillers[i]);
            return m;
        }
        case AggregatorKind::SumExact: {
            Tensor s = hop_fillers[0];
            for (std::size_t i = 1; i < hop_fillers.size(); ++i) s = add(s, hop_fillers[i]);
            return s;
        }
    }
    throw ArgumentError("unknown aggregator");
}

Tensor compose_filler(const EngineConfig& cfg, const Tensor& aggregated) {
    if (cfg.exact) return aggregated;
    if (cfg.weights == nullptr) throw ConfigError("compose needs weights");
    Tensor residual = add(ffn_forward(cfg.weights->ffn_compose, aggregated), aggregated);
    return layernorm(residual, cfg.weights->ln_compose);
}

namespace {

Path greedy_shortest_path(const EntityGraph& g, int src, int dst,
                          std::unordered_map<int, std::vector<int>>& dist_cache) {
    auto it = dist_cache.find(dst);
    if (it == dist_cache.end()) it = dist_cache.emplace(dst, bfs_distances(g, dst)).first;
    const std::vector<int>& dist = it->second;
    if (dist[src] < 0) throw ArgumentError("pair is not connected");
    Path path;
    path.nodes.push_back(src);
    int cur = src;
    while (cur != dst) {
        for (const auto& arc : g.neighbors(cur)) {
            if (dist[arc.neighbor] == dist[cur] - 1) {
                cur = arc.neighbor;
                break;
            }
        }
        path.nodes.push_back(cur);
    }
    return path;
}

}  // namespace

std::vector<NodeMemory> collect_long_dependencies(const EngineInputs& in,
                                                  const std::vector<NodeMemory>& mems,
                                                  const EngineConfig& cfg,
                                                  const std::vector<std::pair<int, int>>& pair_order) {
    validate_engine_inputs(in, cfg);
    const EntityGraph& g = *in.graph;
    if (static_cast<int>(mems.size()) != g.node_count()) {
        throw ConfigError("memory count does not match graph");
    }

    std::vector<NodeMemory> out = mems;
    std::unordered_map<int, std::vector<int>> dist_cache;
    const bool snapshot = cfg.semantics == CollectionSemantics::Snapshot;
    const std::vector<NodeMemory>& read_state = snapshot ? mems : out;

    std::vector<std::pair<std::pair<int, int>, Tensor>> staged;
    for (const auto& [src, dst] : pair_order) {
        if (src == dst) throw ArgumentError("pair endpoints must differ");
        Path path = greedy_shortest_path(g, src, dst, dist_cache);
        std::vector<Tensor> hops;
        hops.reserve(path.nodes.size() - 1);
        for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i) {
            hops.push_back(retrieve(read_state[path.nodes[i]], in.node_embed[path.nodes[i + 1]]));
        }
        Tensor composed = compose_filler(cfg, aggregate(cfg, hops));
        if (snapshot) {
            staged.emplace_back(std::make_pair(src, dst), composed);
        } else {
            out[src] = store(out[src], composed, in.node_embed[dst]);
        }
    }

    if (snapshot) {
        std::sort(staged.begin(), staged.end(), [&](const auto& x, const auto& y) {
            const auto& [xs, xd] = x.first;
            const auto& [ys, yd] = y.first;
            if (g.name_of(xs) != g.name_of(ys)) return g.name_of(xs) < g.name_of(ys);
            return g.name_of(xd) < g.name_of(yd);
        });
        for (const auto& [pair, composed] : staged) {
            out[pair.first] = store(out[pair.first], composed, in.node_embed[pair.second]);
        }
    }
    return out;
}

std::vector<NodeMemory> collect_long_dependencies(const EngineInputs& in,
                                                  const std::vector<NodeMemory>& mems,
                                                  const EngineConfig& cfg) {
    return collect_long_dependencies(in, mems, cfg, connected_pairs(*in.graph));
}

Retrieval retrieve_relations(const EngineInputs& in, const std::vector<NodeMemory>& mems,
                             const Tensor& key, const EngineConfig& cfg) {
    validate_engine_inputs(in, cfg);
    if (!key || key->shape.size() != 1 || key->shape[0] != cfg.dim) {
        throw DimensionError("retrieval key width does not match engine dimension");
    }
    Retrieval r;
    const int n = in.graph->node_count();
    r.updated.reserve(n);
    r.filler.reserve(n);
    for (int i = 0; i < n; ++i) {
        Tensor f = retrieve(mems[i], key);
        r.filler.push_back(f);
        if (cfg.exact) {
            r.updated.push_back(in.node_embed[i]);
        } else {
            Tensor x = concat({in.node_embed[i], layernorm(f, cfg.weights->ln_readout), key});
            r.updated.push_back(ffn_forward(cfg.weights->ffn_readout, x));
        }
    }
    return r;
}

EngineResult run_engine(const EngineInputs& in, const Tensor& key, const EngineConfig& cfg) {
    std::vector<NodeMemory> mems = init_memories(in, cfg);
    mems = collect_long_dependencies(in, mems, cfg);
    Retrieval r = retrieve_relations(in, mems, key, cfg);
    return {std::move(mems), std::move(r.updated), std::move(r.filler)};
}

}  // namespace depwise
