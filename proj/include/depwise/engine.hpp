#pragma once

#include <array>
#include <utility>
#include <vector>

#include "depwise/graph.hpp"
#include "depwise/nn.hpp"
#include "depwise/tpr.hpp"

namespace depwise {

// How per-hop fillers along a path are fused into one vector.
enum class AggregatorKind { RecurrentGated, Mean, Max, SumExact };

// Snapshot: every path reads pre-collection memories and all writes merge at
// the end in canonical pair order, so results do not depend on pair iteration
// order. Progressive: writes land immediately and later paths see them.
enum class CollectionSemantics { Snapshot, Progressive };

struct EngineWeights {
    FfnWeights ffn_init;     // [v_i, e_ij, v_j] -> filler
    LstmWeights lstm;        // hop-sequence aggregator
    FfnWeights ffn_compose;  // aggregated filler -> residual update
    LayerNormParams ln_compose;
    FfnWeights ffn_readout;  // [v_i, ln(filler), key] -> updated embedding
    LayerNormParams ln_readout;

    std::vector<Tensor> parameters() const;
};

EngineWeights make_engine_weights(int d, std::mt19937_64& rng, bool requires_grad = true);

// The engine walks each long-range pair once along its shortest path; there
// is deliberately no stacking depth to tune, so the config carries no layer
// count.
struct EngineConfig {
    int dim = 0;
    AggregatorKind aggregator = AggregatorKind::RecurrentGated;
    CollectionSemantics semantics = CollectionSemantics::Snapshot;
    bool exact = false;                    // identity compose/readout, no weights needed
    const EngineWeights* weights = nullptr;
};

struct EngineInputs {
    const EntityGraph* graph = nullptr;
    std::vector<Tensor> node_embed;                   // per node; doubles as role vector
    std::vector<std::array<Tensor, 2>> edge_feature;  // per edge: [a->b, b->a]

    const Tensor& feature(int edge, int from) const;
};

void validate_engine_inputs(const EngineInputs& in, const EngineConfig& cfg);

std::vector<NodeMemory> init_memories(const EngineInputs& in, const EngineConfig& cfg);

Tensor aggregate(const EngineConfig& cfg, const std::vector<Tensor>& hop_fillers);
Tensor compose_filler(const EngineConfig& cfg, const Tensor& aggregated);

std::vector<NodeMemory> collect_long_dependencies(const EngineInputs& in,
                                                  const std::vector<NodeMemory>& mems,
                                                  const EngineConfig& cfg);
// Test hook: iterate pairs in the given order instead of canonical order.
std::vector<NodeMemory> collect_long_dependencies(const EngineInputs& in,
                                                  const std::vector<NodeMemory>& mems,
                                                  const EngineConfig& cfg,
                                                  const std::vector<std::pair<int, int>>& pair_order);

struct Retrieval {
    std::vector<Tensor> updated;  // per node
    std::vector<Tensor> filler;   // per node; memory unbound with the key
};

Retrieval retrieve_relations(const EngineInputs& in, const std::vector<NodeMemory>& mems,
                             const Tensor& key, const EngineConfig& cfg);

struct EngineResult {
    std::vector<NodeMemory> memories;
    std::vector<Tensor> updated;
    std::vector<Tensor> filler;
};

EngineResult run_engine(const EngineInputs& in, const Tensor& key, const EngineConfig& cfg);

}  // namespace depwise
