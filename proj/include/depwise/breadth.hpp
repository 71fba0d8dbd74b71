#pragma once

#include <cstdint>
#include <vector>

#include "depwise/engine.hpp"
#include "depwise/taskgen.hpp"

namespace depwise {

// One breadth round: h_i' = nl(W_self h_i + mean_j W_nbr [h_j ; e_ij]).
struct BreadthLayer {
    Tensor w_self;  // {d, d}
    Tensor w_nbr;   // {d, 2d}
};

struct BreadthLayerStack {
    std::vector<BreadthLayer> layers;
    Nonlinearity nonlinearity = Nonlinearity::Tanh;

    int num_layers() const { return static_cast<int>(layers.size()); }
    std::vector<Tensor> parameters() const;
};

BreadthLayerStack make_breadth_stack(int d, int num_layers, std::mt19937_64& rng,
                                     Nonlinearity nl = Nonlinearity::Tanh,
                                     bool requires_grad = true);

std::vector<Tensor> breadth_layer_forward(const EngineInputs& in, const BreadthLayer& layer,
                                          Nonlinearity nl,
                                          const std::vector<Tensor>& embeddings);
std::vector<Tensor> breadth_forward(const EngineInputs& in, const BreadthLayerStack& stack);

// Mean pairwise cosine similarity; needs >= 2 embeddings.
double smoothing_metric(const std::vector<std::vector<double>>& embeddings);
double smoothing_metric(const std::vector<Tensor>& embeddings);

// Breadth-aggregation classifier with an explicit layer-count knob; the
// depth engine deliberately has no such parameter.
struct BaselineParams {
    int dim = 32;
    std::vector<Tensor> entity_embed;    // 26 rows
    std::vector<Tensor> relation_embed;  // 9 rows
    BreadthLayerStack stack;
    FfnWeights head;  // [h_src, h_tgt] -> 9 logits

    std::vector<Tensor> parameters() const;
    std::vector<Tensor> embedding_parameters() const;
    std::vector<Tensor> engine_parameters() const;
};

BaselineParams init_baseline(int d, int num_layers, std::uint64_t seed);

Tensor baseline_forward(const StoryInstance& instance, const BaselineParams& params);
Tensor baseline_loss(const StoryInstance& instance, const BaselineParams& params);
int baseline_predict(const StoryInstance& instance, const BaselineParams& params);

// Node embeddings after the full stack, for smoothing measurements.
std::vector<Tensor> baseline_node_states(const StoryInstance& instance,
                                         const BaselineParams& params);

}  // namespace depwise
