#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "depwise/engine.hpp"
#include "depwise/taskgen.hpp"

namespace depwise {

std::string_view to_string(AggregatorKind kind);
std::optional<AggregatorKind> aggregator_from_string(std::string_view s);

inline constexpr int kAlphabet = 26;
inline constexpr int kExactDim = 32;  // one-hot letter roles need d >= 26

int letter_index(const std::string& entity);  // "A".."Z" -> 0..25

struct ModelParams {
    int dim = 64;
    AggregatorKind aggregator = AggregatorKind::RecurrentGated;
    std::vector<Tensor> entity_embed;    // 26 rows, width d
    std::vector<Tensor> relation_embed;  // 9 rows, width d
    EngineWeights engine;
    FfnWeights head;  // [v_src, ln(filler), v_tgt] -> 9 logits
    LayerNormParams ln_head;

    std::vector<Tensor> parameters() const;
    std::vector<Tensor> embedding_parameters() const;
    std::vector<Tensor> engine_parameters() const;  // everything but the tables
};

ModelParams init_model(int d, AggregatorKind aggregator, std::uint64_t seed);

// Rescale each entity row to unit length; projection applied after optimizer
// steps to keep unbinding stable.
void normalize_entity_embeddings(ModelParams& params);

// (src->dst, dst->src) relation features; a self-loop maps to zero vectors.
std::pair<Tensor, Tensor> edge_features(const Triple& t, const ModelParams& params);

Tensor model_forward(const StoryInstance& instance, const ModelParams& params);
Tensor model_loss(const StoryInstance& instance, const ModelParams& params);
int model_predict(const StoryInstance& instance, const ModelParams& params);

// Parameter-free pipeline: one-hot roles, offset fillers, running sums along
// BFS paths. Analytically reproduces the offset oracle.
struct ExactTrace {
    bool has_path = false;
    std::vector<std::string> path;       // entity names, source to target
    std::vector<Offset> hop_offsets;     // one per hop
    Offset composed;
    double filler_norm = 0.0;
    RelationLabel predicted = RelationLabel::Overlap;
};

ExactTrace exact_trace(const StoryInstance& instance, int d = kExactDim);
RelationLabel predict_exact(const StoryInstance& instance, int d = kExactDim);

// Engine inputs for exact mode (letter-indexed one-hot roles, offset edge
// fillers); exposed for property suites.
struct ExactSetup {
    EntityGraph graph;
    EngineInputs inputs;
    EngineConfig config;
};

ExactSetup make_exact_setup(const std::vector<Triple>& triples, int d = kExactDim);

}  // namespace depwise
