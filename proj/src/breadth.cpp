#include "depwise/breadth.hpp"

#include <cmath>

#include "depwise/errors.hpp"
#include "depwise/model.hpp"
#include "depwise/rng.hpp"

namespace depwise {

namespace {

Tensor gauss_matrix(int rows, int cols, std::mt19937_64& rng, bool requires_grad) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto t = zeros({rows, cols}, requires_grad);
    for (auto& v : t->data) v = dist(rng);
    return t;
}

}  // namespace

std::vector<Tensor> BreadthLayerStack::parameters() const {
    std::vector<Tensor> out;
    for (const auto& l : layers) {
        out.push_back(l.w_self);
        out.push_back(l.w_nbr);
    }
    return out;
}

BreadthLayerStack make_breadth_stack(int d, int num_layers, std::mt19937_64& rng,
                                     Nonlinearity nl, bool requires_grad) {
    if (num_layers < 1) throw ArgumentError("breadth stack needs at least one layer");
    BreadthLayerStack stack;
    stack.nonlinearity = nl;
    for (int i = 0; i < num_layers; ++i) {
        BreadthLayer layer;
        layer.w_self = gauss_matrix(d, d, rng, requires_grad);
        layer.w_nbr = gauss_matrix(d, 2 * d, rng, requires_grad);
        stack.layers.push_back(std::move(layer));
    }
    return stack;
}

std::vector<Tensor> breadth_layer_forward(const EngineInputs& in, const BreadthLayer& layer,
                                          Nonlinearity nl,
                                          const std::vector<Tensor>& embeddings) {
    const EntityGraph& g = *in.graph;
    std::vector<Tensor> next;
    next.reserve(g.node_count());
    for (int i = 0; i < g.node_count(); ++i) {
        if (embeddings[i]->shape[0] != layer.w_self->shape[1]) {
            throw DimensionError("breadth layer width mismatch");
        }
        Tensor acc = matvec(layer.w_self, embeddings[i]);
        const auto& arcs = g.neighbors(i);
        if (!arcs.empty()) {
            Tensor msg;
            for (const auto& arc : arcs) {
                Tensor m = matvec(layer.w_nbr,
                                  concat({embeddings[arc.neighbor], in.feature(arc.edge, i)}));
                msg = msg ? add(msg, m) : m;
            }
            acc = add(acc, scale(msg, 1.0 / static_cast<double>(arcs.size())));
        }
        next.push_back(apply_nonlinearity(nl, acc));
    }
    return next;
}

std::vector<Tensor> breadth_forward(const EngineInputs& in, const BreadthLayerStack& stack) {
    std::vector<Tensor> h = in.node_embed;
    for (const auto& layer : stack.layers) {
        h = breadth_layer_forward(in, layer, stack.nonlinearity, h);
    }
    return h;
}

double smoothing_metric(const std::vector<std::vector<double>>& embeddings) {
    const std::size_t n = embeddings.size();
    if (n < 2) throw ArgumentError("smoothing metric needs at least two embeddings");
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double dot = 0.0, ni = 0.0, nj = 0.0;
            for (std::size_t c = 0; c < embeddings[i].size(); ++c) {
                dot += embeddings[i][c] * embeddings[j][c];
                ni += embeddings[i][c] * embeddings[i][c];
                nj += embeddings[j][c] * embeddings[j][c];
            }
            double denom = std::sqrt(ni) * std::sqrt(nj);
            total += denom == 0.0 ? 0.0 : dot / denom;
            ++pairs;
        }
    }
    return total / static_cast<double>(pairs);
}

double smoothing_metric(const std::vector<Tensor>& embeddings) {
    std::vector<std::vector<double>> rows;
    rows.reserve(embeddings.size());
    for (const auto& t : embeddings) rows.push_back(t->data);
    return smoothing_metric(rows);
}

std::vector<Tensor> BaselineParams::parameters() const {
    std::vector<Tensor> out = embedding_parameters();
    auto rest = engine_parameters();
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

std::vector<Tensor> BaselineParams::embedding_parameters() const {
    std::vector<Tensor> out(entity_embed.begin(), entity_embed.end());
    out.insert(out.end(), relation_embed.begin(), relation_embed.end());
    return out;
}

std::vector<Tensor> BaselineParams::engine_parameters() const {
    std::vector<Tensor> out = stack.parameters();
    auto h = head.parameters();
    out.insert(out.end(), h.begin(), h.end());
    return out;
}

BaselineParams init_baseline(int d, int num_layers, std::uint64_t seed) {
    BaselineParams p;
    p.dim = d;
    auto rng = seeded_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
    for (int i = 0; i < kAlphabet; ++i) {
        auto row = zeros({d}, true);
        for (auto& v : row->data) v = gauss(rng);
        p.entity_embed.push_back(row);
    }
    for (int i = 0; i < kNumRelationLabels; ++i) {
        auto row = zeros({d}, true);
        for (auto& v : row->data) v = gauss(rng);
        p.relation_embed.push_back(row);
    }
    p.stack = make_breadth_stack(d, num_layers, rng);
    p.head = make_ffn({2 * d, d, kNumRelationLabels}, Nonlinearity::Tanh, rng);
    return p;
}

namespace {

struct BaselineSetup {
    EntityGraph graph;
    EngineInputs inputs;
    int src = -1;
    int tgt = -1;
};

BaselineSetup prepare_baseline(const StoryInstance& instance, const BaselineParams& params) {
    BaselineSetup s;
    s.graph = build_graph(instance.triples);
    if (!s.graph.has_node(instance.question.first) ||
        !s.graph.has_node(instance.question.second)) {
        throw InputError("question entity does not appear in the story");
    }
    s.src = s.graph.index_of(instance.question.first);
    s.tgt = s.graph.index_of(instance.question.second);
    s.inputs.graph = &s.graph;
    for (int i = 0; i < s.graph.node_count(); ++i) {
        s.inputs.node_embed.push_back(params.entity_embed[letter_index(s.graph.name_of(i))]);
    }
    for (int e = 0; e < s.graph.edge_count(); ++e) {
        const auto& edge = s.graph.edge(e);
        s.inputs.edge_feature.push_back(
            {params.relation_embed[static_cast<int>(edge.label_ab)],
             params.relation_embed[static_cast<int>(inverse_label(edge.label_ab))]});
    }
    return s;
}

}  // namespace

Tensor baseline_forward(const StoryInstance& instance, const BaselineParams& params) {
    BaselineSetup s = prepare_baseline(instance, params);
    std::vector<Tensor> h = breadth_forward(s.inputs, params.stack);
    return ffn_forward(params.head, concat({h[s.src], h[s.tgt]}));
}

Tensor baseline_loss(const StoryInstance& instance, const BaselineParams& params) {
    return softmax_xent(baseline_forward(instance, params), static_cast<int>(instance.gold));
}

int baseline_predict(const StoryInstance& instance, const BaselineParams& params) {
    Tensor logits = baseline_forward(instance, params);
    int best = 0;
    for (int i = 1; i < kNumRelationLabels; ++i) {
        if (logits->data[i] > logits->data[best]) best = i;
    }
    return best;
}

std::vector<Tensor> baseline_node_states(const StoryInstance& instance,
                                         const BaselineParams& params) {
    BaselineSetup s = prepare_baseline(instance, params);
    return breadth_forward(s.inputs, params.stack);
}

}  // namespace depwise
