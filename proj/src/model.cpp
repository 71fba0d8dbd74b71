#include "depwise/model.hpp"

#include <cmath>

#include "depwise/errors.hpp"
#include "depwise/rng.hpp"

namespace depwise {

std::string_view to_string(AggregatorKind kind) {
    switch (kind) {
        case AggregatorKind::RecurrentGated: return "recurrent-gated";
        case AggregatorKind::Mean: return "mean";
        case AggregatorKind::Max: return "max";
        case AggregatorKind::SumExact: return "sum-exact";
    }
    throw ArgumentError("unknown aggregator kind");
}

std::optional<AggregatorKind> aggregator_from_string(std::string_view s) {
    for (auto kind : {AggregatorKind::RecurrentGated, AggregatorKind::Mean,
                      AggregatorKind::Max, AggregatorKind::SumExact}) {
        if (to_string(kind) == s) return kind;
    }
    return std::nullopt;
}

int letter_index(const std::string& entity) {
    if (entity.size() != 1 || entity[0] < 'A' || entity[0] > 'Z') {
        throw InputError("entity must be a single capital letter: " + entity);
    }
    return entity[0] - 'A';
}

std::vector<Tensor> ModelParams::parameters() const {
    std::vector<Tensor> out = embedding_parameters();
    auto rest = engine_parameters();
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

std::vector<Tensor> ModelParams::embedding_parameters() const {
    std::vector<Tensor> out(entity_embed.begin(), entity_embed.end());
    out.insert(out.end(), relation_embed.begin(), relation_embed.end());
    return out;
}

std::vector<Tensor> ModelParams::engine_parameters() const {
    std::vector<Tensor> out = engine.parameters();
    auto h = head.parameters();
    out.insert(out.end(), h.begin(), h.end());
    auto ln = ln_head.parameters();
    out.insert(out.end(), ln.begin(), ln.end());
    return out;
}

ModelParams init_model(int d, AggregatorKind aggregator, std::uint64_t seed) {
    if (d < 2) throw ArgumentError("model dimension must be at least 2");
    ModelParams p;
    p.dim = d;
    p.aggregator = aggregator;
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
    p.engine = make_engine_weights(d, rng);
    p.head = make_ffn({3 * d, d, kNumRelationLabels}, Nonlinearity::Tanh, rng);
    p.ln_head = make_layernorm(d);
    normalize_entity_embeddings(p);
    return p;
}

void normalize_entity_embeddings(ModelParams& params) {
    for (auto& row : params.entity_embed) {
        double norm = 0.0;
        for (double v : row->data) norm += v * v;
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        for (auto& v : row->data) v /= norm;
    }
}

std::pair<Tensor, Tensor> edge_features(const Triple& t, const ModelParams& params) {
    if (t.src == t.dst) {
        return {zeros({params.dim}), zeros({params.dim})};
    }
    int fwd = static_cast<int>(t.label);
    int rev = static_cast<int>(inverse_label(t.label));
    return {params.relation_embed[fwd], params.relation_embed[rev]};
}

namespace {

struct ForwardSetup {
    EntityGraph graph;
    EngineInputs inputs;
    EngineConfig config;
    int src = -1;
    int tgt = -1;
};

ForwardSetup prepare_forward(const StoryInstance& instance, const ModelParams& params) {
    ForwardSetup s;
    s.graph = build_graph(instance.triples);
    if (!s.graph.has_node(instance.question.first) ||
        !s.graph.has_node(instance.question.second)) {
        throw InputError("question entity does not appear in the story");
    }
    s.src = s.graph.index_of(instance.question.first);
    s.tgt = s.graph.index_of(instance.question.second);

    s.inputs.graph = &s.graph;
    s.inputs.node_embed.reserve(s.graph.node_count());
    for (int i = 0; i < s.graph.node_count(); ++i) {
        s.inputs.node_embed.push_back(params.entity_embed[letter_index(s.graph.name_of(i))]);
    }
    s.inputs.edge_feature.reserve(s.graph.edge_count());
    for (int e = 0; e < s.graph.edge_count(); ++e) {
        const auto& edge = s.graph.edge(e);
        int fwd = static_cast<int>(edge.label_ab);
        int rev = static_cast<int>(inverse_label(edge.label_ab));
        s.inputs.edge_feature.push_back(
            {params.relation_embed[fwd], params.relation_embed[rev]});
    }

    s.config.dim = params.dim;
    s.config.aggregator = params.aggregator;
    s.config.semantics = CollectionSemantics::Snapshot;
    s.config.exact = false;
    s.config.weights = &params.engine;
    return s;
}

}  // namespace

Tensor model_forward(const StoryInstance& instance, const ModelParams& params) {
    ForwardSetup s = prepare_forward(instance, params);
    Tensor key = s.inputs.node_embed[s.tgt];
    EngineResult r = run_engine(s.inputs, key, s.config);
    Tensor x = concat({r.updated[s.src], layernorm(r.filler[s.src], params.ln_head),
                       r.updated[s.tgt]});
    return ffn_forward(params.head, x);
}

Tensor model_loss(const StoryInstance& instance, const ModelParams& params) {
    return softmax_xent(model_forward(instance, params), static_cast<int>(instance.gold));
}

int model_predict(const StoryInstance& instance, const ModelParams& params) {
    Tensor logits = model_forward(instance, params);
    int best = 0;
    for (int i = 1; i < kNumRelationLabels; ++i) {
        if (logits->data[i] > logits->data[best]) best = i;
    }
    return best;
}

ExactSetup make_exact_setup(const std::vector<Triple>& triples, int d) {
    if (d < kAlphabet) throw ArgumentError("exact mode needs d >= 26 for one-hot roles");
    ExactSetup s;
    s.graph = build_graph(triples);
    s.inputs.graph = &s.graph;
    for (int i = 0; i < s.graph.node_count(); ++i) {
        auto role = zeros({d});
        role->data[letter_index(s.graph.name_of(i))] = 1.0;
        s.inputs.node_embed.push_back(role);
    }
    auto encode = [&](Offset o) {
        auto f = zeros({d});
        f->data[0] = o.dx;
        f->data[1] = o.dy;
        return f;
    };
    for (int e = 0; e < s.graph.edge_count(); ++e) {
        Offset o = offset_of(s.graph.edge(e).label_ab);
        s.inputs.edge_feature.push_back({encode(o), encode({-o.dx, -o.dy})});
    }
    s.config.dim = d;
    s.config.aggregator = AggregatorKind::SumExact;
    s.config.semantics = CollectionSemantics::Snapshot;
    s.config.exact = true;
    return s;
}

ExactTrace exact_trace(const StoryInstance& instance, int d) {
    ExactSetup s = make_exact_setup(instance.triples, d);
    if (!s.graph.has_node(instance.question.first) ||
        !s.graph.has_node(instance.question.second)) {
        throw InputError("question entity does not appear in the story");
    }
    int src = s.graph.index_of(instance.question.first);
    int tgt = s.graph.index_of(instance.question.second);

    ExactTrace trace;
    auto path = bfs_shortest_path(s.graph, src, tgt);
    if (path) {
        trace.has_path = true;
        for (int node : path->nodes) trace.path.push_back(s.graph.name_of(node));
        for (std::size_t i = 0; i + 1 < path->nodes.size(); ++i) {
            trace.hop_offsets.push_back(
                offset_of(s.graph.label_between(path->nodes[i], path->nodes[i + 1])));
        }
    }

    EngineResult r = run_engine(s.inputs, s.inputs.node_embed[tgt], s.config);
    const Tensor& filler = r.filler[src];
    double norm = 0.0;
    for (double v : filler->data) norm += v * v;
    trace.filler_norm = std::sqrt(norm);
    trace.composed = {static_cast<int>(std::lround(filler->data[0])),
                      static_cast<int>(std::lround(filler->data[1]))};
    trace.predicted = label_from_signs(sign_of(trace.composed.dx), sign_of(trace.composed.dy));
    return trace;
}

RelationLabel predict_exact(const StoryInstance& instance, int d) {
    return exact_trace(instance, d).predicted;
}

}  // namespace depwise
